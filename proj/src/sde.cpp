#include "periopt/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "interp.hpp"
#include "parallel.hpp"
#include "periopt/dual_control.hpp"
#include "periopt/rng.hpp"
#include "periopt/version.hpp"

namespace periopt {

void SimulationConfig::validate() const {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
}

FeedbackPolicy FeedbackPolicy::zero() { return FeedbackPolicy{}; }

FeedbackPolicy FeedbackPolicy::cash() {
  FeedbackPolicy p;
  p.kind_ = Kind::Cash;
  return p;
}

FeedbackPolicy FeedbackPolicy::merton_log() {
  FeedbackPolicy p;
  p.kind_ = Kind::MertonLog;
  return p;
}

FeedbackPolicy FeedbackPolicy::merton_power(double alpha) {
  FeedbackPolicy p;
  p.kind_ = Kind::MertonPower;
  p.alpha_ = alpha;
  return p;
}

FeedbackPolicy FeedbackPolicy::constant(double value) {
  FeedbackPolicy p;
  p.kind_ = Kind::Constant;
  p.const_ = value;
  return p;
}

FeedbackPolicy FeedbackPolicy::table(std::vector<double> t_knots,
                                     std::vector<double> y_knots,
                                     std::vector<double> values) {
  if (t_knots.empty() || y_knots.empty() ||
      values.size() != t_knots.size() * y_knots.size())
    throw std::invalid_argument("policy table dims mismatch");
  FeedbackPolicy p;
  p.kind_ = Kind::Table;
  p.tk_ = std::move(t_knots);
  p.yk_ = std::move(y_knots);
  p.values_ = std::move(values);
  return p;
}

double FeedbackPolicy::value(const MarketModel& model, double t,
                             double y) const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::Cash:
      return 0.0;
    case Kind::MertonLog: {
      const double s = model.sigma(y);
      return (model.mu(y) - model.r) / (s * s);
    }
    case Kind::MertonPower: {
      const double s = model.sigma(y);
      return (model.mu(y) - model.r) / ((1.0 - alpha_) * s * s);
    }
    case Kind::Constant:
      return const_;
    case Kind::Table:
      return detail::bilinear(tk_, yk_, values_, t, y);
  }
  return 0.0;
}

namespace {

PathBundle make_bundle(const SimulationConfig& cfg, std::uint64_t stream) {
  cfg.validate();
  PathBundle b;
  b.cfg = cfg;
  b.stream = stream;
  b.times.resize(cfg.n_steps + 1);
  for (int k = 0; k <= cfg.n_steps; ++k)
    b.times[k] = cfg.tau * static_cast<double>(k) / cfg.n_steps;
  const std::size_t nk = static_cast<std::size_t>(cfg.n_paths) * cfg.n_steps;
  b.dW1.resize(nk);
  b.dW2.resize(nk);
  b.Y.resize(static_cast<std::size_t>(cfg.n_paths) * (cfg.n_steps + 1));
  return b;
}

void fill_paths(const MarketModel& model, const double* y0s, double y0_scalar,
                PathBundle& b) {
  const int K = b.cfg.n_steps;
  const double dt = b.dt();
  const double sdt = std::sqrt(dt);
  const double rho1 = model.rho;
  const double rho2 = std::sqrt(std::max(0.0, 1.0 - rho1 * rho1));
  detail::parallel_paths(b.cfg.n_paths, [&](std::int64_t p0, std::int64_t p1) {
    for (std::int64_t p = p0; p < p1; ++p) {
      double y = y0s ? y0s[p] : y0_scalar;
      double* Yp = &b.Y[static_cast<std::size_t>(p) * (K + 1)];
      double* d1 = &b.dW1[static_cast<std::size_t>(p) * K];
      double* d2 = &b.dW2[static_cast<std::size_t>(p) * K];
      Yp[0] = y;
      for (int k = 0; k < K; ++k) {
        const auto g = rng::gauss_pair(b.cfg.seed, b.stream,
                                       static_cast<std::uint64_t>(p),
                                       static_cast<std::uint64_t>(k));
        const double w1 = g.z1 * sdt;
        const double w2 = g.z2 * sdt;
        d1[k] = w1;
        d2[k] = w2;
        y += model.b(y) * dt + model.beta(y) * (rho1 * w1 + rho2 * w2);
        Yp[k + 1] = y;
      }
    }
  });
}

}  // namespace

PathBundle simulate_factor(const MarketModel& model, double y0,
                           const SimulationConfig& cfg, std::uint64_t stream) {
  PathBundle b = make_bundle(cfg, stream);
  fill_paths(model, nullptr, y0, b);
  return b;
}

PathBundle simulate_factor_from(const MarketModel& model,
                                std::span<const double> y0s,
                                const SimulationConfig& cfg,
                                std::uint64_t stream) {
  if (static_cast<std::int64_t>(y0s.size()) != cfg.n_paths)
    throw std::invalid_argument("y0s size must equal n_paths");
  PathBundle b = make_bundle(cfg, stream);
  fill_paths(model, y0s.data(), 0.0, b);
  return b;
}

std::int64_t simulate_wealth(const MarketModel& model,
                             const FeedbackPolicy& policy, double x0,
                             PathBundle& bundle) {
  if (!(x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");
  const int K = bundle.cfg.n_steps;
  const double dt = bundle.dt();
  const double r = model.r;
  bundle.X.resize(bundle.Y.size());
  std::atomic<std::int64_t> clamps{0};
  detail::parallel_paths(bundle.cfg.n_paths, [&](std::int64_t p0, std::int64_t p1) {
    std::int64_t local_clamps = 0;
    for (std::int64_t p = p0; p < p1; ++p) {
      const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
      const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
      double* Xp = &bundle.X[static_cast<std::size_t>(p) * (K + 1)];
      double lx = std::log(x0);
      Xp[0] = x0;
      for (int k = 0; k < K; ++k) {
        const double y = Yp[k];
        double pi = policy.value(model, bundle.times[k], y);
        if (std::abs(pi) > policy.pi_max) {
          pi = std::clamp(pi, -policy.pi_max, policy.pi_max);
          ++local_clamps;
        }
        const double mu = model.mu(y);
        const double sg = model.sigma(y);
        lx += (r + (mu - r) * pi - 0.5 * sg * sg * pi * pi) * dt +
              sg * pi * d1[k];
        Xp[k + 1] = std::exp(lx);
      }
    }
    clamps += local_clamps;
  });
  bundle.policy_clamps += clamps.load();
  return clamps.load();
}

void simulate_dual_density(const MarketModel& model, const DualControl& eta,
                           PathBundle& bundle) {
  const int K = bundle.cfg.n_steps;
  const double dt = bundle.dt();
  bundle.Z.resize(bundle.Y.size());
  detail::parallel_paths(bundle.cfg.n_paths, [&](std::int64_t p0, std::int64_t p1) {
    for (std::int64_t p = p0; p < p1; ++p) {
      const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
      const double* d1 = &bundle.dW1[static_cast<std::size_t>(p) * K];
      const double* d2 = &bundle.dW2[static_cast<std::size_t>(p) * K];
      double* Zp = &bundle.Z[static_cast<std::size_t>(p) * (K + 1)];
      double lz = 0.0;
      Zp[0] = 1.0;
      for (int k = 0; k < K; ++k) {
        const double y = Yp[k];
        const double th = theta(model, y);
        const double ev = eta(bundle.times[k], y);
        lz += -th * d1[k] + ev * d2[k] - 0.5 * (th * th + ev * ev) * dt;
        Zp[k + 1] = std::exp(lz);
      }
    }
  });
}

std::vector<double> doleans_exponential(
    const PathBundle& bundle, BrownianAxis axis,
    const std::function<double(double, double)>& f) {
  const int K = bundle.cfg.n_steps;
  const double dt = bundle.dt();
  const std::vector<double>& dw =
      (axis == BrownianAxis::W1) ? bundle.dW1 : bundle.dW2;
  std::vector<double> out(static_cast<std::size_t>(bundle.cfg.n_paths));
  detail::parallel_paths(bundle.cfg.n_paths, [&](std::int64_t p0, std::int64_t p1) {
    for (std::int64_t p = p0; p < p1; ++p) {
      const double* Yp = &bundle.Y[static_cast<std::size_t>(p) * (K + 1)];
      const double* d = &dw[static_cast<std::size_t>(p) * K];
      double le = 0.0;
      for (int k = 0; k < K; ++k) {
        const double v = f(bundle.times[k], Yp[k]);
        le += v * d[k] - 0.5 * v * v * dt;
      }
      out[static_cast<std::size_t>(p)] = std::exp(le);
    }
  });
  return out;
}

namespace {

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void put_vec(std::ofstream& os, const std::vector<double>& v) {
  put(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_vec(std::ifstream& is, std::vector<double>& v) {
  std::uint64_t n = 0;
  get(is, n);
  v.resize(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void write_bundle(const PathBundle& bundle, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write("PERI", 4);
  put(os, static_cast<std::uint32_t>(kBundleFormatVersion));
  put(os, bundle.cfg.seed);
  put(os, bundle.stream);
  put(os, bundle.cfg.n_paths);
  put(os, static_cast<std::int32_t>(bundle.cfg.n_steps));
  put(os, bundle.cfg.tau);
  std::uint8_t flags = 0;
  if (!bundle.X.empty()) flags |= 1;
  if (!bundle.Z.empty()) flags |= 2;
  put(os, flags);
  put_vec(os, bundle.times);
  put_vec(os, bundle.dW1);
  put_vec(os, bundle.dW2);
  put_vec(os, bundle.Y);
  if (flags & 1) put_vec(os, bundle.X);
  if (flags & 2) put_vec(os, bundle.Z);
  if (!os) throw std::runtime_error("write failed: " + path);
}

PathBundle read_bundle(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PERI", 4) != 0)
    throw std::runtime_error("not a PERI bundle: " + path);
  std::uint32_t version = 0;
  get(is, version);
  if (version != kBundleFormatVersion)
    throw std::runtime_error("unsupported bundle version");
  PathBundle b;
  get(is, b.cfg.seed);
  get(is, b.stream);
  get(is, b.cfg.n_paths);
  std::int32_t steps = 0;
  get(is, steps);
  b.cfg.n_steps = steps;
  get(is, b.cfg.tau);
  std::uint8_t flags = 0;
  get(is, flags);
  get_vec(is, b.times);
  get_vec(is, b.dW1);
  get_vec(is, b.dW2);
  get_vec(is, b.Y);
  if (flags & 1) get_vec(is, b.X);
  if (flags & 2) get_vec(is, b.Z);
  if (!is) throw std::runtime_error("truncated bundle: " + path);
  return b;
}

void write_terminal_csv(const PathBundle& bundle, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "path,Y_tau";
  if (!bundle.X.empty()) os << ",X_tau";
  if (!bundle.Z.empty()) os << ",Z_tau";
  os << "\n";
  char buf[64];
  for (std::int64_t p = 0; p < bundle.cfg.n_paths; ++p) {
    os << p;
    std::snprintf(buf, sizeof(buf), ",%.17g", bundle.terminal_Y(p));
    os << buf;
    if (!bundle.X.empty()) {
      std::snprintf(buf, sizeof(buf), ",%.17g", bundle.terminal_X(p));
      os << buf;
    }
    if (!bundle.Z.empty()) {
      std::snprintf(buf, sizeof(buf), ",%.17g", bundle.terminal_Z(p));
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace periopt
