#include "app.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "featpipe/error.hpp"

namespace featpipe::cli {

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::model: return 4;
    case ErrorKind::internal: break;
  }
  return 1;
}

std::string describe(const KeySpec& spec) {
  std::string text = spec.help;
  if (!spec.fallback.is_null()) {
    text += " (default ";
    if (spec.fallback.is_array()) {
      std::string joined;
      for (const auto& v : spec.fallback) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      text += joined;
    } else {
      text += spec.fallback.is_string() ? spec.fallback.get<std::string>() : spec.fallback.dump();
    }
    text += ")";
  }
  return text;
}

const char* type_name(KeyType type) {
  switch (type) {
    case KeyType::path: return "PATH";
    case KeyType::string: return "TEXT";
    case KeyType::number: return "NUMBER";
    case KeyType::integer: return "INT";
    case KeyType::boolean: return "BOOL";
    case KeyType::number_list: return "NUMBERS";
    case KeyType::string_list: return "NAMES";
  }
  return "TEXT";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::set<std::string>* keys_read) {
  CLI::App app{"Image classification with frozen CNN features and an SVM", "featpipe"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 internal error, 2 config error, 3 data error, 4 model/bundle error.\n"
             "Every config key can be set in a JSON file (--config) or with --<key> VALUE.");

  std::string config_path;
  bool skip_bad = false;
  std::map<std::string, std::string> texts;
  std::vector<std::pair<std::string, CLI::Option*>> flags;
  const Command* selected = nullptr;

  std::map<std::string, CLI::App*> groups;
  for (const auto& cmd : commands()) {
    CLI::App* parent = &app;
    std::string leaf = cmd.name;
    if (const auto space = cmd.name.find(' '); space != std::string::npos) {
      const std::string group = cmd.name.substr(0, space);
      leaf = cmd.name.substr(space + 1);
      auto& g = groups[group];
      if (!g) {
        g = app.add_subcommand(group, "Run a comparison method through the evaluation path");
        g->require_subcommand(1);
      }
      parent = g;
    }
    CLI::App* sub = parent->add_subcommand(leaf, cmd.description);
    sub->add_option("--config", config_path, "JSON config file");
    if (cmd.name == "extract") sub->add_flag("--skip-bad", skip_bad, "warn about undecodable images and skip them");
    for (const auto& key : cmd.keys) {
      const auto& spec = key_spec(key);
      flags.emplace_back(key, sub->add_option("--" + key, texts[key], describe(spec))->type_name(type_name(spec.type)));
    }
    std::string footer = "Config keys read:";
    for (const auto& key : cmd.keys) footer += " " + key;
    if (!cmd.outputs.empty()) {
      footer += "\nOutputs under --out:";
      for (const auto& o : cmd.outputs) footer += " " + o;
    }
    sub->footer(footer);
    sub->callback([&selected, &cmd] { selected = &cmd; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (!selected) return 2;

  Config config;
  try {
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& [key, option] : flags) {
      if (option->count() > 0) config.set_from_text(key, texts[key]);
    }
    Context ctx{config, out, err, skip_bad};
    selected->run(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (keys_read) *keys_read = config.keys_read();
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    if (keys_read) *keys_read = config.keys_read();
    return 1;
  }
  if (keys_read) *keys_read = config.keys_read();
  return 0;
}

}  // namespace featpipe::cli
