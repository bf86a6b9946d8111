#include "hrv/nn/tensor.hpp"

#include <sstream>

#include "hrv/errors.hpp"

namespace hrv::nn {

std::int64_t shape_size(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw NumericError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(shape_size(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != static_cast<std::int64_t>(data_.size()))
        throw NumericError("tensor data length does not match shape");
}

Tensor Tensor::full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) x = v;
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream ss;
    ss << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) ss << (i ? "," : "") << shape_[i];
    ss << ")";
    return ss.str();
}

}  // namespace hrv::nn
