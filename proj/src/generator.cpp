#include "tightcert/generator.hpp"

#include <sstream>

namespace tightcert {

Architecture parse_architecture(const std::string& text, ActivationKind activation) {
  std::vector<Index> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '-')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      dims.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw ParseError("architecture '" + text + "': bad layer size '" + part + "'");
    }
  }
  if (dims.size() < 2) throw ParseError("architecture '" + text + "': need at least in-out");
  Architecture arch;
  arch.input_dim = dims.front();
  arch.num_labels = dims.back();
  arch.hidden.assign(dims.begin() + 1, dims.end() - 1);
  arch.activation = activation;
  return arch;
}

Network random_network(const Architecture& arch, WeightMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> bias(-0.5, 0.5);
  std::vector<Index> widths{arch.input_dim};
  widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
  widths.push_back(arch.num_labels);

  std::vector<Layer> layers;
  for (std::size_t t = 0; t + 1 < widths.size(); ++t) {
    const Index rows = widths[t + 1], cols = widths[t];
    Matrix W(rows, cols);
    if (mode == WeightMode::Mixed) {
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) W(i, j) = 2.0 * unit(rng) - 1.0;
    } else if (t == 0) {
      for (Index j = 0; j < cols; ++j) {
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        for (Index i = 0; i < rows; ++i) W(i, j) = sign * unit(rng);
      }
    } else {
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) W(i, j) = unit(rng);
    }
    Vector b(rows);
    for (Index i = 0; i < rows; ++i) b[i] = bias(rng);
    const bool last = t + 2 == widths.size();
    layers.push_back(Layer{AffineOp{W, b}, last ? ActivationKind::Identity : arch.activation});
  }
  return Network(arch.input_dim, arch.num_labels, std::move(layers));
}

Dataset random_dataset(const Network& net, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset data;
  for (std::size_t k = 0; k < samples; ++k) {
    Vector x(net.input_dim());
    for (Index j = 0; j < x.size(); ++j) x[j] = unit(rng);
    data.labels.push_back(predict_label(net, x));
    data.inputs.push_back(std::move(x));
  }
  return data;
}

}  // namespace tightcert
