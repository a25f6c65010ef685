#include "dynens/tiny_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dynens/data.hpp"
#include "dynens/errors.hpp"
#include "text_util.hpp"

namespace dynens {
namespace {

void require_input_dim(const NetParams& params, const Matrix& inputs) {
  if (params.layers.empty()) throw std::invalid_argument("network has no layers");
  if (inputs.cols() != params.input_dim()) {
    throw std::invalid_argument("input dimension " + std::to_string(inputs.cols()) +
                                " does not match network input " +
                                std::to_string(params.input_dim()));
  }
  if (inputs.rows() == 0) throw std::invalid_argument("empty input batch");
}

// out = in * W^T + b, for every row.
Matrix affine(const Matrix& in, const DenseLayer& layer) {
  const auto n = in.rows();
  const auto d_in = layer.weights.cols();
  const auto d_out = layer.weights.rows();
  Matrix out(n, d_out);
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = in.data().data() + r * d_in;
    double* y = out.data().data() + r * d_out;
    for (std::size_t o = 0; o < d_out; ++o) {
      const double* w = layer.weights.data().data() + o * d_in;
      double s = layer.bias[o];
      for (std::size_t i = 0; i < d_in; ++i) s += w[i] * x[i];
      y[o] = s;
    }
  }
  return out;
}

// In-place ReLU followed by inverted dropout. Returns the multiplier applied
// to each entry (0 where ReLU or dropout zeroed it).
Matrix relu_dropout(Matrix& z, double drop, Rng* rng) {
  Matrix gate(z.rows(), z.cols());
  const double keep_scale = rng != nullptr && drop > 0.0 ? 1.0 / (1.0 - drop) : 1.0;
  auto& zs = z.data();
  auto& gs = gate.data();
  for (std::size_t k = 0; k < zs.size(); ++k) {
    double g = zs[k] > 0.0 ? 1.0 : 0.0;
    if (rng != nullptr && drop > 0.0) g = rng->bernoulli(drop) ? 0.0 : g * keep_scale;
    gs[k] = g;
    zs[k] *= g;
  }
  return gate;
}

void softmax_rows(Matrix& z) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      s += v;
    }
    for (auto& v : row) v /= s;
  }
}

Matrix logits(const NetParams& params, const Matrix& inputs, Rng* rng,
              std::vector<Matrix>* activations, std::vector<Matrix>* gates) {
  Matrix a = inputs;
  const auto last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = affine(a, params.layers[l]);
    if (activations != nullptr) activations->push_back(std::move(a));
    if (l == last) return z;
    Matrix g = relu_dropout(z, params.dropout_prob, rng);
    if (gates != nullptr) gates->push_back(std::move(g));
    a = std::move(z);
  }
  return a;
}

}  // namespace

std::vector<std::size_t> NetConfig::layer_dims() const {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(num_classes);
  return dims;
}

void NetConfig::validate() const {
  if (input_dim == 0) throw InvalidConfiguration("input_dim must be positive");
  if (num_classes < 2) throw InvalidConfiguration("num_classes must be at least 2");
  for (auto h : hidden_dims) {
    if (h == 0) throw InvalidConfiguration("hidden layer widths must be positive");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw InvalidConfiguration("dropout_prob must lie in [0, 1)");
  }
  if (!(weight_init_scale >= 0.0) || !std::isfinite(weight_init_scale)) {
    throw InvalidConfiguration("weight_init_scale must be non-negative and finite");
  }
  if (batch_size == 0) throw InvalidConfiguration("batch_size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidConfiguration("momentum must lie in [0, 1)");
  }
}

std::vector<std::size_t> NetParams::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers.empty()) return dims;
  dims.push_back(layers.front().weights.cols());
  for (const auto& l : layers) dims.push_back(l.weights.rows());
  return dims;
}

std::size_t NetParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.data().size() + l.bias.size();
  return n;
}

NetParams NetParams::zeros_like() const {
  NetParams z;
  z.dropout_prob = dropout_prob;
  for (const auto& l : layers) {
    z.layers.push_back({Matrix(l.weights.rows(), l.weights.cols()),
                        std::vector<double>(l.bias.size(), 0.0)});
  }
  return z;
}

NetParams init_params(const NetConfig& config) {
  config.validate();
  Rng rng(derive_seed({config.seed, 0x1a1705ULL}));
  const auto dims = config.layer_dims();
  NetParams p;
  p.dropout_prob = config.dropout_prob;
  const double s = config.weight_init_scale;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer{Matrix(dims[l + 1], dims[l]), std::vector<double>(dims[l + 1], 0.0)};
    for (auto& w : layer.weights.data()) w = s == 0.0 ? 0.0 : rng.uniform(-s, s);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

PredictionMatrix forward(const NetParams& params, const Matrix& inputs, ForwardMode mode,
                         Rng* rng) {
  require_input_dim(params, inputs);
  Rng* drop_rng = nullptr;
  if (mode != ForwardMode::kInference) {
    if (rng == nullptr) throw std::invalid_argument("dropout forward pass needs an rng");
    drop_rng = rng;
  }
  Matrix z = logits(params, inputs, drop_rng, nullptr, nullptr);
  softmax_rows(z);
  return PredictionMatrix(z.rows(), z.cols(), std::move(z.data()));
}

LossAndGrad loss_and_grad(const NetParams& params, const Matrix& inputs,
                          std::span<const std::size_t> labels, Rng* dropout_rng) {
  require_input_dim(params, inputs);
  const auto n = inputs.rows();
  if (labels.size() != n) throw std::invalid_argument("label count does not match batch size");
  const auto p = params.num_classes();

  std::vector<Matrix> acts;
  std::vector<Matrix> gates;
  Matrix delta = logits(params, inputs, dropout_rng, &acts, &gates);

  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] >= p) throw std::invalid_argument("label out of range");
    auto z = delta.row(r);
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    const double log_s = std::log(s);
    loss += mx + log_s - z[labels[r]];
    for (auto& v : z) v = std::exp(v - mx - log_s) * inv_n;
    z[labels[r]] -= inv_n;
  }

  LossAndGrad out{loss * inv_n, params.zeros_like()};
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    auto& g = out.grads.layers[l];
    const Matrix& a = acts[l];
    const auto d_in = layer.weights.cols();
    const auto d_out = layer.weights.rows();
    for (std::size_t r = 0; r < n; ++r) {
      const double* dr = delta.data().data() + r * d_out;
      const double* ar = a.data().data() + r * d_in;
      for (std::size_t o = 0; o < d_out; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        g.bias[o] += d;
        double* gw = g.weights.data().data() + o * d_in;
        for (std::size_t i = 0; i < d_in; ++i) gw[i] += d * ar[i];
      }
    }
    if (l == 0) break;
    Matrix prev(n, d_in);
    const Matrix& gate = gates[l - 1];
    for (std::size_t r = 0; r < n; ++r) {
      const double* dr = delta.data().data() + r * d_out;
      double* pr = prev.data().data() + r * d_in;
      for (std::size_t o = 0; o < d_out; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        const double* w = layer.weights.data().data() + o * d_in;
        for (std::size_t i = 0; i < d_in; ++i) pr[i] += d * w[i];
      }
      const double* gr = gate.data().data() + r * d_in;
      for (std::size_t i = 0; i < d_in; ++i) pr[i] *= gr[i];
    }
    delta = std::move(prev);
  }
  return out;
}

TrainState TrainState::start(const NetConfig& config, std::uint64_t rng_seed) {
  TrainState s{init_params(config), {}, 0, 0.0, config.momentum, Rng(rng_seed)};
  s.velocity = s.params.zeros_like();
  return s;
}

void sgd_step(TrainState& state, const NetParams& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be non-negative");
  if (grads.layer_dims() != state.params.layer_dims()) {
    throw std::invalid_argument("gradient shape does not match parameters");
  }
  NetParams params = state.params;
  NetParams velocity = state.velocity;
  const double mu = state.momentum;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto update = [&](std::vector<double>& p, std::vector<double>& v, const std::vector<double>& g) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (!std::isfinite(g[k])) throw TrainingDiverged("non-finite gradient");
        v[k] = mu * v[k] + g[k];
        p[k] -= lr * v[k];
        if (!std::isfinite(p[k])) throw TrainingDiverged("non-finite parameter after update");
      }
    };
    update(params.layers[l].weights.data(), velocity.layers[l].weights.data(),
           grads.layers[l].weights.data());
    update(params.layers[l].bias, velocity.layers[l].bias, grads.layers[l].bias);
  }
  state.params = std::move(params);
  state.velocity = std::move(velocity);
  state.lr = lr;
}

double train_epoch(TrainState& state, const LabeledDataset& data, std::size_t batch_size,
                   double lr) {
  if (data.size() == 0) throw std::invalid_argument("empty training set");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  state.rng.shuffle(order.begin(), order.end());
  const auto d = data.dims();
  const bool dropout = state.params.dropout_prob > 0.0;
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto stop = std::min(order.size(), start + batch_size);
    Matrix x(stop - start, d);
    std::vector<std::size_t> y(stop - start);
    for (std::size_t k = start; k < stop; ++k) {
      const auto src = data.features.row(order[k]);
      std::copy(src.begin(), src.end(), x.row(k - start).begin());
      y[k - start] = data.labels[order[k]];
    }
    auto lg = loss_and_grad(state.params, x, y, dropout ? &state.rng : nullptr);
    if (!std::isfinite(lg.loss)) throw TrainingDiverged("non-finite loss");
    sgd_step(state, lg.grads, lr);
    total += lg.loss;
    ++batches;
  }
  ++state.epoch;
  return total / static_cast<double>(batches);
}

double evaluate(const NetParams& params, const LabeledDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("cannot evaluate on an empty dataset");
  const auto pred = forward(params, data.features);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < data.size(); ++t) hits += pred.argmax(t) == data.labels[t];
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

PredictionMatrix mc_dropout_predict(const NetParams& params, const Matrix& inputs, std::size_t m,
                                    std::uint64_t seed) {
  if (!(params.dropout_prob > 0.0)) {
    throw InvalidConfiguration("MC dropout needs a network with dropout_prob > 0");
  }
  if (m == 0) throw std::invalid_argument("MC dropout needs at least one pass");
  Rng rng(seed);
  std::vector<double> sum;
  std::size_t n = 0, p = 0;
  for (std::size_t pass = 0; pass < m; ++pass) {
    auto pm = forward(params, inputs, ForwardMode::kMcDropout, &rng);
    if (sum.empty()) {
      n = pm.rows();
      p = pm.classes();
      sum.assign(pm.values().size(), 0.0);
    }
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += pm.values()[k];
  }
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) s += sum[t * p + k];
    for (std::size_t k = 0; k < p; ++k) sum[t * p + k] /= s;
  }
  return PredictionMatrix(n, p, std::move(sum));
}

void write_net(std::ostream& out, const NetParams& params) {
  out << "TINYNET v1\n";
  const auto dims = params.layer_dims();
  for (std::size_t k = 0; k < dims.size(); ++k) out << (k ? " " : "") << dims[k];
  out << '\n' << format_exact(params.dropout_prob) << '\n';
  for (const auto& layer : params.layers) {
    for (std::size_t o = 0; o < layer.weights.rows(); ++o) {
      const auto row = layer.weights.row(o);
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_exact(row[i]);
      out << '\n';
    }
    for (std::size_t o = 0; o < layer.bias.size(); ++o) {
      out << (o ? " " : "") << format_exact(layer.bias[o]);
    }
    out << '\n';
  }
}

NetParams read_net(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto need_line = [&](const char* what) {
    if (!detail::next_content_line(in, line, line_no)) {
      throw ParseError(std::string("unexpected end of file, expected ") + what, line_no);
    }
  };
  need_line("header");
  if (detail::trim(line) != "TINYNET v1") throw ParseError("expected 'TINYNET v1'", line_no);
  need_line("layer dims");
  std::vector<std::size_t> dims;
  for (auto f : detail::split_ws(line)) dims.push_back(detail::parse_size(f, line_no));
  if (dims.size() < 2) throw ParseError("need at least two layer dims", line_no);
  for (auto d : dims) {
    if (d == 0) throw ParseError("layer dims must be positive", line_no);
  }
  need_line("dropout_prob");
  NetParams params;
  params.dropout_prob = detail::parse_double(line, line_no);
  if (!(params.dropout_prob >= 0.0 && params.dropout_prob < 1.0)) {
    throw ParseError("dropout_prob must lie in [0, 1)", line_no);
  }
  auto read_row = [&](std::span<double> dst, const char* what) {
    need_line(what);
    const auto fields = detail::split_ws(line);
    if (fields.size() != dst.size()) {
      throw ParseError("expected " + std::to_string(dst.size()) + " values, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = detail::parse_double(fields[k], line_no);
  };
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer{Matrix(dims[l + 1], dims[l]), std::vector<double>(dims[l + 1])};
    for (std::size_t o = 0; o < dims[l + 1]; ++o) read_row(layer.weights.row(o), "weight row");
    read_row(layer.bias, "bias row");
    params.layers.push_back(std::move(layer));
  }
  if (detail::next_content_line(in, line, line_no)) throw ParseError("unexpected trailing data", line_no);
  return params;
}

void save_net(const std::string& path, const NetParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_net(out, params);
  if (!out) throw std::runtime_error("write failed: " + path);
}

NetParams load_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_net(in);
}

}  // namespace dynens
