#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tightcert/network.hpp"

namespace tightcert {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

// Field accessors that report the JSON path on failure.
const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

Index as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError(where + ": expected a nonnegative integer");
  return static_cast<Index>(v.get<long long>());
}

double as_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

Vector as_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Index>(i)] = as_real(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

template <std::size_t N>
std::array<Index, N> as_counts(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N)
    throw ParseError(where + ": expected " + std::to_string(N) + " integers");
  std::array<Index, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = as_count(v[i], where);
  return out;
}

Matrix as_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ParseError(where + ": expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols)
      throw ParseError(row_where + ": expected a row of " + std::to_string(cols) + " numbers");
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Index>(r), static_cast<Index>(c)) = as_real(v[r][c], row_where);
  }
  return out;
}

Layer parse_layer(const json& j, const std::string& where) {
  Layer layer;
  const json& act = field(j, "activation", where);
  if (!act.is_string()) throw ParseError(where + ".activation: expected a string");
  try {
    layer.activation = parse_activation(act.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ".activation: " + e.what());
  }
  const std::string type = j.value("type", std::string("affine"));
  if (type == "affine") {
    layer.op = AffineOp{as_matrix(field(j, "weights", where), where + ".weights"),
                        as_vector(field(j, "biases", where), where + ".biases")};
  } else if (type == "conv") {
    ConvOp conv;
    conv.in_shape = as_counts<3>(field(j, "in_shape", where), where + ".in_shape");
    conv.kernel_shape = as_counts<4>(field(j, "kernel_shape", where), where + ".kernel_shape");
    const Vector k = as_vector(field(j, "kernels", where), where + ".kernels");
    conv.kernels.assign(k.data(), k.data() + k.size());
    conv.bias = as_vector(field(j, "biases", where), where + ".biases");
    if (j.contains("stride")) conv.stride = as_counts<2>(j.at("stride"), where + ".stride");
    if (j.contains("padding")) conv.padding = as_counts<2>(j.at("padding"), where + ".padding");
    layer.op = std::move(conv);
  } else {
    throw ParseError(where + ".type: unknown layer type '" + type + "'");
  }
  return layer;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

Network parse_network(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  const Index input_dim = as_count(field(root, "input_dim", "model"), "model.input_dim");
  const Index num_labels = as_count(field(root, "num_labels", "model"), "model.num_labels");
  const json& layers_json = field(root, "layers", "model");
  if (!layers_json.is_array()) throw ParseError("model.layers: expected an array");
  std::vector<Layer> layers;
  for (std::size_t t = 0; t < layers_json.size(); ++t)
    layers.push_back(parse_layer(layers_json[t], "model.layers[" + std::to_string(t) + "]"));
  return Network(input_dim, num_labels, std::move(layers));
}

Network load_network(const std::string& path) {
  try {
    return parse_network(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string network_to_json(const Network& net) {
  json root;
  root["input_dim"] = net.input_dim();
  root["num_labels"] = net.num_labels();
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json j;
    j["activation"] = std::string(to_string(layer.activation));
    if (const auto* a = std::get_if<AffineOp>(&layer.op)) {
      j["type"] = "affine";
      json rows = json::array();
      for (Index r = 0; r < a->W.rows(); ++r) rows.push_back(vector_json(a->W.row(r).transpose()));
      j["weights"] = rows;
      j["biases"] = vector_json(a->b);
    } else {
      const auto& c = std::get<ConvOp>(layer.op);
      j["type"] = "conv";
      j["in_shape"] = c.in_shape;
      j["kernel_shape"] = c.kernel_shape;
      j["kernels"] = c.kernels;
      j["biases"] = vector_json(c.bias);
      j["stride"] = c.stride;
      j["padding"] = c.padding;
    }
    layers.push_back(std::move(j));
  }
  root["layers"] = std::move(layers);
  return root.dump(1) + "\n";
}

void save_network(const Network& net, const std::string& path) {
  write_file(path, network_to_json(net));
}

Dataset parse_dataset(const std::string& text, Index input_dim) {
  Dataset data;
  std::istringstream in(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    const std::string where = "dataset line " + std::to_string(line_no);
    long long label = 0;
    if (!(fields >> label) || label < 0) throw ParseError(where + ": expected a nonnegative label");
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(where + ": bad number '" + tok + "'");
      }
    }
    if (static_cast<Index>(values.size()) != input_dim) {
      throw ParseError(where + ": expected " + std::to_string(input_dim) + " values, found " +
                       std::to_string(values.size()));
    }
    data.labels.push_back(static_cast<Index>(label));
    data.inputs.push_back(Eigen::Map<Vector>(values.data(), input_dim));
  }
  return data;
}

Dataset load_dataset(const std::string& path, Index input_dim) {
  try {
    return parse_dataset(read_file(path), input_dim);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (Index j = 0; j < data.inputs[i].size(); ++j) out << ',' << data.inputs[i][j];
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace tightcert
