#include "wanco/netarch.hpp"

#include "wanco/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wanco {
namespace {

using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;
using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ConstMap cmap(std::span<const double> p, std::size_t off, Eigen::Index rows, Eigen::Index cols) {
  return ConstMap(p.data() + off, rows, cols);
}

MutMap mmap(std::span<double> p, std::size_t off, Eigen::Index rows, Eigen::Index cols) {
  return MutMap(p.data() + off, rows, cols);
}

// prod_k x_k(1-x_k) over the batch and its derivative along each coordinate.
void boundary_factor(const Matrix& x, RowArray& bf, std::vector<RowArray>& dbf, int n_tan) {
  const Eigen::Index d = x.rows();
  const Eigen::Index B = x.cols();
  std::vector<RowArray> f(static_cast<std::size_t>(d));
  bf = RowArray::Ones(B);
  for (Eigen::Index k = 0; k < d; ++k) {
    const RowArray xk = x.row(k).array();
    f[static_cast<std::size_t>(k)] = xk * (1.0 - xk);
    bf *= f[static_cast<std::size_t>(k)];
  }
  dbf.assign(static_cast<std::size_t>(n_tan), RowArray());
  for (int j = 0; j < n_tan; ++j) {
    RowArray g = 1.0 - 2.0 * x.row(j).array();
    for (Eigen::Index k = 0; k < d; ++k) {
      if (k != j) g *= f[static_cast<std::size_t>(k)];
    }
    dbf[static_cast<std::size_t>(j)] = std::move(g);
  }
}

void glorot(std::span<double> p, std::size_t off, std::size_t n, double fan_in, double fan_out,
            const CounterRng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < n; ++i) p[off + i] = bound * (2.0 * rng.uniform(off + i) - 1.0);
}

}  // namespace

void ResNetConfig::validate() const {
  if (d_in < 1 || d_out < 1) throw std::invalid_argument("ResNet: input and output dimensions must be >= 1");
  if (depth < 1 || width < 1) throw std::invalid_argument("ResNet: depth and width must be >= 1");
  if (output.kind == OutputTransform::Kind::ObstacleAffine && d_in != 1) {
    throw std::invalid_argument("ResNet: obstacle_affine output requires a 1D input");
  }
}

void ScalarMultiplierConfig::validate() const {
  if (width < 1 || d_out < 1) throw std::invalid_argument("scalar multiplier: width and d_out must be >= 1");
}

double hard_dirichlet_gl(double raw, std::span<const double> x) {
  if (x.size() != 2) throw std::invalid_argument("hard_dirichlet_gl expects a 2D point");
  return raw * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) - 1.0;
}

std::vector<double> partition_nonneg_dirichlet(std::span<const double> raw, std::span<const double> x) {
  double bf = 1.0;
  for (double xi : x) bf *= xi * (1.0 - xi);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::max(raw[i], 0.0) * bf;
  return out;
}

std::vector<double> periodic_embed(std::span<const double> x) {
  std::vector<double> out;
  out.reserve(2 * x.size());
  for (double xi : x) {
    out.push_back(std::cos(kTwoPi * xi));
    out.push_back(std::sin(kTwoPi * xi));
  }
  return out;
}

double nonpos_transform(double raw) { return -std::max(-raw, 0.0); }

double obstacle_affine(double raw, double x, double g0, double g1) {
  return raw * x * (1.0 - x) + g0 * (1.0 - x) + g1 * x;
}

std::size_t declare_segments(ParamStore& store, const std::string& prefix, const ParamLayout& layout) {
  std::size_t first = store.size();
  for (const auto& [suffix, length] : layout) store.append(prefix + "/" + suffix, length);
  return first;
}

// ---------------------------------------------------------------- ResNet

ResNet::ResNet(ResNetConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto w = static_cast<std::size_t>(config_.width);
  const auto de = static_cast<std::size_t>(config_.embedded_dim());
  const auto dout = static_cast<std::size_t>(config_.d_out);
  std::size_t at = 0;
  off_.w_in = at;
  at += w * de;
  off_.b_in = at;
  at += w;
  for (int k = 0; k < config_.depth; ++k) {
    off_.w.push_back(at);
    at += w * w;
    off_.b.push_back(at);
    at += w;
  }
  off_.w_out = at;
  at += dout * w;
  off_.b_out = at;
  at += dout;
  param_count_ = at;
}

ParamLayout ResNet::layout() const {
  const auto w = static_cast<std::size_t>(config_.width);
  const auto de = static_cast<std::size_t>(config_.embedded_dim());
  const auto dout = static_cast<std::size_t>(config_.d_out);
  ParamLayout out{{"W_in", w * de}, {"b_in", w}};
  for (int k = 1; k <= config_.depth; ++k) {
    out.emplace_back("W_" + std::to_string(k), w * w);
    out.emplace_back("b_" + std::to_string(k), w);
  }
  out.emplace_back("W_out", dout * w);
  out.emplace_back("b_out", dout);
  return out;
}

void ResNet::init_params(std::span<double> params, std::uint64_t seed) const {
  if (params.size() != param_count_) throw std::invalid_argument("ResNet::init_params: size mismatch");
  std::fill(params.begin(), params.end(), 0.0);
  const CounterRng rng(seed);
  const double w = config_.width;
  glorot(params, off_.w_in, static_cast<std::size_t>(config_.width * config_.embedded_dim()),
         config_.embedded_dim(), w, rng);
  for (int k = 0; k < config_.depth; ++k) {
    glorot(params, off_.w[static_cast<std::size_t>(k)], static_cast<std::size_t>(config_.width * config_.width), w,
           w, rng);
  }
  glorot(params, off_.w_out, static_cast<std::size_t>(config_.d_out * config_.width), w, config_.d_out, rng);
  // start sign-constrained outputs inside the active side of the ReLU
  const auto kind = config_.output.kind;
  if (kind == OutputTransform::Kind::Nonpos || kind == OutputTransform::Kind::Nonneg ||
      kind == OutputTransform::Kind::PartitionNonnegDirichlet) {
    const double b = kind == OutputTransform::Kind::Nonpos ? -1.0 : 1.0;
    std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(off_.b_out), config_.d_out, b);
  }
}

void ResNet::apply_output_transform(const Matrix& x, Eigen::Index B, int n_tan, const Matrix& raw,
                                    Matrix& out) const {
  using Kind = OutputTransform::Kind;
  const auto& t = config_.output;
  switch (t.kind) {
    case Kind::Identity:
      out = raw;
      return;
    case Kind::Nonneg: {
      const Matrix mask = (raw.leftCols(B).array() > 0.0).cast<double>().matrix();
      out.resize(raw.rows(), raw.cols());
      out.leftCols(B) = raw.leftCols(B).cwiseMax(0.0);
      for (int j = 0; j < n_tan; ++j) out.middleCols((1 + j) * B, B) = raw.middleCols((1 + j) * B, B).cwiseProduct(mask);
      return;
    }
    case Kind::Nonpos: {
      const Matrix mask = (raw.leftCols(B).array() < 0.0).cast<double>().matrix();
      out.resize(raw.rows(), raw.cols());
      out.leftCols(B) = raw.leftCols(B).cwiseMin(0.0);
      for (int j = 0; j < n_tan; ++j) out.middleCols((1 + j) * B, B) = raw.middleCols((1 + j) * B, B).cwiseProduct(mask);
      return;
    }
    case Kind::ObstacleAffine: {
      const RowArray xs = x.row(0).array();
      const RowArray s = xs * (1.0 - xs);
      out.resize(raw.rows(), raw.cols());
      out.leftCols(B) = ((raw.leftCols(B).array().rowwise() * s).rowwise() + (t.g0 * (1.0 - xs) + t.g1 * xs)).matrix();
      if (n_tan == 1) {
        const RowArray ds = 1.0 - 2.0 * xs;
        out.middleCols(B, B) = ((raw.middleCols(B, B).array().rowwise() * s) +
                                (raw.leftCols(B).array().rowwise() * ds) + (t.g1 - t.g0))
                                   .matrix();
      }
      return;
    }
    case Kind::HardDirichletGl:
    case Kind::PartitionNonnegDirichlet: {
      RowArray bf;
      std::vector<RowArray> dbf;
      boundary_factor(x, bf, dbf, n_tan);
      const bool gl = t.kind == Kind::HardDirichletGl;
      const Eigen::ArrayXXd rv = raw.leftCols(B).array();
      const Eigen::ArrayXXd mask = gl ? Eigen::ArrayXXd::Ones(rv.rows(), B) : (rv > 0.0).cast<double>().eval();
      const Eigen::ArrayXXd pos = gl ? rv : rv.max(0.0).eval();
      out.resize(raw.rows(), raw.cols());
      out.leftCols(B) = (pos.rowwise() * bf).matrix();
      if (gl) out.leftCols(B).array() -= 1.0;
      for (int j = 0; j < n_tan; ++j) {
        const auto tj = raw.middleCols((1 + j) * B, B).array();
        out.middleCols((1 + j) * B, B) =
            ((mask * tj).rowwise() * bf + pos.rowwise() * dbf[static_cast<std::size_t>(j)]).matrix();
      }
      return;
    }
  }
}

void ResNet::output_transform_adjoint(const Matrix& x, Eigen::Index B, int n_tan, const Matrix& raw,
                                      const Matrix& seed, Matrix& raw_bar) const {
  using Kind = OutputTransform::Kind;
  const auto& t = config_.output;
  switch (t.kind) {
    case Kind::Identity:
      raw_bar = seed;
      return;
    case Kind::Nonneg:
    case Kind::Nonpos: {
      const Eigen::ArrayXXd rv = raw.leftCols(B).array();
      const Matrix mask = t.kind == Kind::Nonneg ? (rv > 0.0).cast<double>().matrix().eval()
                                                 : (rv < 0.0).cast<double>().matrix().eval();
      raw_bar.resize(seed.rows(), seed.cols());
      for (int j = 0; j <= n_tan; ++j) raw_bar.middleCols(j * B, B) = seed.middleCols(j * B, B).cwiseProduct(mask);
      return;
    }
    case Kind::ObstacleAffine: {
      const RowArray xs = x.row(0).array();
      const RowArray s = xs * (1.0 - xs);
      raw_bar.resize(seed.rows(), seed.cols());
      raw_bar.leftCols(B) = (seed.leftCols(B).array().rowwise() * s).matrix();
      if (n_tan == 1) {
        const RowArray ds = 1.0 - 2.0 * xs;
        raw_bar.leftCols(B).array() += seed.middleCols(B, B).array().rowwise() * ds;
        raw_bar.middleCols(B, B) = (seed.middleCols(B, B).array().rowwise() * s).matrix();
      }
      return;
    }
    case Kind::HardDirichletGl:
    case Kind::PartitionNonnegDirichlet: {
      RowArray bf;
      std::vector<RowArray> dbf;
      boundary_factor(x, bf, dbf, n_tan);
      const bool gl = t.kind == Kind::HardDirichletGl;
      const Eigen::ArrayXXd rv = raw.leftCols(B).array();
      const Eigen::ArrayXXd mask = gl ? Eigen::ArrayXXd::Ones(rv.rows(), B) : (rv > 0.0).cast<double>().eval();
      Eigen::ArrayXXd vb = seed.leftCols(B).array().rowwise() * bf;
      raw_bar.resize(seed.rows(), seed.cols());
      for (int j = 0; j < n_tan; ++j) {
        const auto sj = seed.middleCols((1 + j) * B, B).array();
        vb += sj.rowwise() * dbf[static_cast<std::size_t>(j)];
        raw_bar.middleCols((1 + j) * B, B) = (mask * (sj.rowwise() * bf)).matrix();
      }
      raw_bar.leftCols(B) = (mask * vb).matrix();
      return;
    }
  }
}

BatchJet ResNet::forward(std::span<const double> params, const Matrix& x, bool with_jacobian, Cache* cache) const {
  if (params.size() != param_count_) throw std::invalid_argument("ResNet::forward: parameter size mismatch");
  if (x.rows() != config_.d_in) {
    throw std::invalid_argument("ResNet::forward: input dimension " + std::to_string(x.rows()) + " != " +
                                std::to_string(config_.d_in));
  }
  const Eigen::Index B = x.cols();
  const int nt = with_jacobian ? config_.d_in : 0;
  const Eigen::Index cols = (1 + nt) * B;
  const Eigen::Index w = config_.width;
  const Eigen::Index de = config_.embedded_dim();

  Matrix embed = Matrix::Zero(de, cols);
  if (config_.input == InputTransform::Identity) {
    embed.leftCols(B) = x;
    for (int j = 0; j < nt; ++j) embed.row(j).segment((1 + j) * B, B).setOnes();
  } else {
    for (int i = 0; i < config_.d_in; ++i) {
      const RowArray arg = kTwoPi * x.row(i).array();
      const RowArray c = arg.cos();
      const RowArray s = arg.sin();
      embed.row(2 * i).head(B) = c.matrix();
      embed.row(2 * i + 1).head(B) = s.matrix();
      if (i < nt) {
        embed.row(2 * i).segment((1 + i) * B, B) = (-kTwoPi * s).matrix();
        embed.row(2 * i + 1).segment((1 + i) * B, B) = (kTwoPi * c).matrix();
      }
    }
  }

  Matrix state(w, cols);
  state.noalias() = cmap(params, off_.w_in, w, de) * embed;
  state.leftCols(B).colwise() += cmap(params, off_.b_in, w, 1).col(0);

  const bool keep = cache != nullptr;
  if (keep) {
    cache->with_jacobian = with_jacobian;
    cache->batch = B;
    cache->x = x;
    cache->state.clear();
    cache->tangent_pre.clear();
    cache->d1.clear();
    cache->d2.clear();
  }

  Matrix a, d1, d2;
  for (int k = 0; k < config_.depth; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    Matrix pre(w, cols);
    pre.noalias() = cmap(params, off_.w[ku], w, w) * state;
    pre.leftCols(B).colwise() += cmap(params, off_.b[ku], w, 1).col(0);
    activate(config_.activation, pre.leftCols(B), a, d1, keep && nt > 0 ? &d2 : nullptr);
    Matrix next = state;
    next.leftCols(B) += a;
    for (int j = 0; j < nt; ++j) {
      next.middleCols((1 + j) * B, B) += d1.cwiseProduct(pre.middleCols((1 + j) * B, B));
    }
    if (keep) {
      cache->state.push_back(std::move(state));
      cache->tangent_pre.push_back(pre.rightCols(nt * B));
      cache->d1.push_back(std::move(d1));
      cache->d2.push_back(nt > 0 ? std::move(d2) : Matrix());
    }
    state = std::move(next);
  }

  Matrix raw(config_.d_out, cols);
  raw.noalias() = cmap(params, off_.w_out, config_.d_out, w) * state;
  raw.leftCols(B).colwise() += cmap(params, off_.b_out, config_.d_out, 1).col(0);

  Matrix out;
  apply_output_transform(x, B, nt, raw, out);

  if (keep) {
    cache->state.push_back(std::move(state));
    cache->embed = std::move(embed);
    cache->raw = std::move(raw);
  }

  BatchJet jet;
  jet.value = out.leftCols(B);
  for (int j = 0; j < nt; ++j) jet.jacobian.push_back(out.middleCols((1 + j) * B, B));
  return jet;
}

void ResNet::backward(std::span<const double> params, const Cache& cache, const BatchJet& seed,
                      std::span<double> grad) const {
  if (params.size() != param_count_ || grad.size() != param_count_) {
    throw std::invalid_argument("ResNet::backward: parameter size mismatch");
  }
  const Eigen::Index B = cache.batch;
  const int nt = cache.with_jacobian ? config_.d_in : 0;
  const Eigen::Index cols = (1 + nt) * B;
  const Eigen::Index w = config_.width;
  const Eigen::Index de = config_.embedded_dim();
  if (seed.value.rows() != config_.d_out || seed.value.cols() != B) {
    throw std::invalid_argument("ResNet::backward: seed shape mismatch");
  }
  if (!seed.jacobian.empty() && static_cast<int>(seed.jacobian.size()) != nt) {
    throw std::invalid_argument("ResNet::backward: jacobian seed given for a pass without tangents");
  }

  Matrix stacked_seed = Matrix::Zero(config_.d_out, cols);
  stacked_seed.leftCols(B) = seed.value;
  for (std::size_t j = 0; j < seed.jacobian.size(); ++j) {
    stacked_seed.middleCols((1 + static_cast<Eigen::Index>(j)) * B, B) = seed.jacobian[j];
  }

  Matrix raw_bar;
  output_transform_adjoint(cache.x, B, nt, cache.raw, stacked_seed, raw_bar);

  const auto depth = static_cast<std::size_t>(config_.depth);
  mmap(grad, off_.w_out, config_.d_out, w).noalias() += raw_bar * cache.state[depth].transpose();
  mmap(grad, off_.b_out, config_.d_out, 1).col(0) += raw_bar.leftCols(B).rowwise().sum();

  Matrix sbar(w, cols);
  sbar.noalias() = cmap(params, off_.w_out, config_.d_out, w).transpose() * raw_bar;

  Matrix zbar(w, cols);
  for (std::size_t k = depth; k-- > 0;) {
    zbar.leftCols(B) = sbar.leftCols(B).cwiseProduct(cache.d1[k]);
    for (int j = 0; j < nt; ++j) {
      const auto tbar = sbar.middleCols((1 + j) * B, B);
      zbar.leftCols(B).array() +=
          tbar.array() * cache.d2[k].array() * cache.tangent_pre[k].middleCols(j * B, B).array();
      zbar.middleCols((1 + j) * B, B) = tbar.cwiseProduct(cache.d1[k]);
    }
    mmap(grad, off_.w[k], w, w).noalias() += zbar * cache.state[k].transpose();
    mmap(grad, off_.b[k], w, 1).col(0) += zbar.leftCols(B).rowwise().sum();
    sbar.noalias() += cmap(params, off_.w[k], w, w).transpose() * zbar;
  }

  mmap(grad, off_.w_in, w, de).noalias() += sbar * cache.embed.transpose();
  mmap(grad, off_.b_in, w, 1).col(0) += sbar.leftCols(B).rowwise().sum();
}

SpatialJet ResNet::eval_with_input_grad(std::span<const double> params, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != config_.d_in) {
    throw std::invalid_argument("eval_with_input_grad: point has dimension " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(config_.d_in));
  }
  Matrix xm(config_.d_in, 1);
  for (int i = 0; i < config_.d_in; ++i) xm(i, 0) = x[static_cast<std::size_t>(i)];
  const BatchJet jet = forward(params, xm, true);
  SpatialJet out;
  out.value = jet.value.col(0);
  out.jacobian.resize(config_.d_out, config_.d_in);
  for (int j = 0; j < config_.d_in; ++j) out.jacobian.col(j) = jet.jacobian[static_cast<std::size_t>(j)].col(0);
  return out;
}

Vector ResNet::eval(std::span<const double> params, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != config_.d_in) throw std::invalid_argument("ResNet::eval: dimension mismatch");
  Matrix xm(config_.d_in, 1);
  for (int i = 0; i < config_.d_in; ++i) xm(i, 0) = x[static_cast<std::size_t>(i)];
  return forward(params, xm, false).value.col(0);
}

// ---------------------------------------------------- ScalarMultiplierNet

ScalarMultiplierNet::ScalarMultiplierNet(ScalarMultiplierConfig config) : config_(config) { config_.validate(); }

std::size_t ScalarMultiplierNet::param_count() const noexcept {
  const auto w = static_cast<std::size_t>(config_.width);
  const auto d = static_cast<std::size_t>(config_.d_out);
  return w + w + d * w + d;
}

ParamLayout ScalarMultiplierNet::layout() const {
  const auto w = static_cast<std::size_t>(config_.width);
  const auto d = static_cast<std::size_t>(config_.d_out);
  return {{"W_hidden", w}, {"b_hidden", w}, {"W_out", d * w}, {"b_out", d}};
}

void ScalarMultiplierNet::init_params(std::span<double> params, std::uint64_t seed) const {
  if (params.size() != param_count()) throw std::invalid_argument("ScalarMultiplierNet::init_params: size mismatch");
  std::fill(params.begin(), params.end(), 0.0);
  const CounterRng rng(seed);
  const auto w = static_cast<std::size_t>(config_.width);
  glorot(params, 0, w, 1.0, config_.width, rng);
  glorot(params, w, w, 1.0, config_.width, rng);
  glorot(params, 2 * w, static_cast<std::size_t>(config_.d_out) * w, config_.width, config_.d_out, rng);
}

Vector ScalarMultiplierNet::value(std::span<const double> params) const {
  if (params.size() != param_count()) throw std::invalid_argument("ScalarMultiplierNet: parameter size mismatch");
  const Eigen::Index w = config_.width;
  Vector h(w);
  for (Eigen::Index i = 0; i < w; ++i) h(i) = activate(config_.activation, params[static_cast<std::size_t>(w + i)]).value;
  return cmap(params, static_cast<std::size_t>(2 * w), config_.d_out, w) * h +
         cmap(params, static_cast<std::size_t>(2 * w + config_.d_out * w), config_.d_out, 1).col(0);
}

void ScalarMultiplierNet::backward(std::span<const double> params, const Vector& seed, std::span<double> grad) const {
  if (params.size() != param_count() || grad.size() != param_count() || seed.size() != config_.d_out) {
    throw std::invalid_argument("ScalarMultiplierNet::backward: size mismatch");
  }
  const Eigen::Index w = config_.width;
  const auto w_out_off = static_cast<std::size_t>(2 * w);
  const auto b_out_off = static_cast<std::size_t>(2 * w + config_.d_out * w);
  Vector h(w), dh(w);
  for (Eigen::Index i = 0; i < w; ++i) {
    const auto t = activate(config_.activation, params[static_cast<std::size_t>(w + i)]);
    h(i) = t.value;
    dh(i) = t.d1;
  }
  mmap(grad, w_out_off, config_.d_out, w).noalias() += seed * h.transpose();
  mmap(grad, b_out_off, config_.d_out, 1).col(0) += seed;
  const Vector hbar = cmap(params, w_out_off, config_.d_out, w).transpose() * seed;
  // The hidden weights multiply the constant input 0 and receive no gradient.
  mmap(grad, static_cast<std::size_t>(w), w, 1).col(0) += hbar.cwiseProduct(dh);
}

}  // namespace wanco
