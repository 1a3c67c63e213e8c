#include "featpipe/tensor.hpp"

#include "featpipe/error.hpp"

namespace featpipe {
namespace {

void validate(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw ShapeError("rank", "tensor rank must be 1..4, got " + std::to_string(shape.size()));
  }
  for (std::size_t axis = 0; axis < shape.size(); ++axis) {
    if (shape[axis] == 0) {
      throw ShapeError("axis " + std::to_string(axis),
                       "tensor extents must be positive, got " + to_string(shape));
    }
  }
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out.empty() ? "<scalar>" : out;
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  validate(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate(shape_);
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("data length", "shape " + to_string(shape_) + " needs " +
                                        std::to_string(element_count(shape_)) + " values, got " +
                                        std::to_string(data_.size()));
  }
}

Tensor Tensor::reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }

Tensor Tensor::reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

}  // namespace featpipe
