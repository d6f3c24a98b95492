#include "sphtap/mcsim.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "sphtap/errors.hpp"
#include "sphtap/parallel.hpp"
#include "sphtap/rng.hpp"

namespace sphtap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-mode Gaussian proposal u_i ~ N(0, P_i^{-1}). The log weight against
// the standard Gaussian is Σ_i ½ u_i^T (P_i - I) u_i - ½ Σ_i log|P_i|.
struct Proposal {
  std::vector<Eigen::MatrixXd> chol;      // lower factor of P_i^{-1}; one entry if shared
  std::vector<Eigen::MatrixXd> excess;    // P_i - I
  double log_const = 0.0;
  bool weighted = true;

  bool shared() const { return chol.size() == 1; }
};

Proposal standard_proposal(Eigen::Index n) {
  Proposal pr;
  pr.chol.push_back(Eigen::MatrixXd::Identity(n, n));
  pr.excess.push_back(Eigen::MatrixXd::Zero(n, n));
  pr.weighted = false;
  return pr;
}

Proposal covariance_proposal(const SymMatrix& q, int size) {
  Proposal pr;
  pr.chol.push_back(Eigen::LLT<Eigen::MatrixXd>(q.dense()).matrixL());
  const Eigen::MatrixXd prec = inverse(q).dense();
  pr.excess.push_back(prec - Eigen::MatrixXd::Identity(q.dim(), q.dim()));
  pr.log_const = 0.5 * size * logdet(q);
  return pr;
}

// Precision Q^{-1} - 2 c λ_i β on mode i, falling back to Q^{-1} where that
// is not positive definite.
Proposal tilted_proposal(const SymMatrix& q, const Eigen::VectorXd& lambdas,
                         const Eigen::VectorXd& beta, double tilt) {
  const Eigen::Index n = q.dim();
  const Eigen::MatrixXd base = inverse(q).dense();
  Proposal pr;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    Eigen::MatrixXd prec = base;
    prec.diagonal() -= 2.0 * tilt * lambdas(i) * beta;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
      prec = base;
      llt.compute(prec);
    }
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
    pr.chol.push_back(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL());
    pr.excess.push_back(prec - Eigen::MatrixXd::Identity(n, n));
    pr.log_const -= llt.matrixLLT().diagonal().array().log().sum();
  }
  return pr;
}

// Returns the log integrand for a sample that hit the window. u is n x N,
// gram = u u^T.
using Integrand = std::function<double(const Eigen::MatrixXd& u, const Eigen::MatrixXd& gram)>;

struct BatchTally {
  double log_sum = -kInf;  // log Σ of weights over hits
  long long samples = 0;
  long long hits = 0;
};

void add_log(BatchTally& t, double v) {
  if (v == -kInf) return;
  if (t.log_sum == -kInf) {
    t.log_sum = v;
  } else if (v > t.log_sum) {
    t.log_sum = v + std::log1p(std::exp(t.log_sum - v));
  } else {
    t.log_sum += std::log1p(std::exp(v - t.log_sum));
  }
}

FEEstimate run_batches(const SymMatrix& q, int size, const Proposal& pr, const Integrand& integrand,
                       const McOptions& opts) {
  if (!(opts.eps > 0.0)) throw InputError("Monte Carlo: eps must be positive");
  if (opts.samples < kBatches) throw InputError("Monte Carlo: need at least 16 samples");
  const Eigen::Index n = q.dim();
  std::vector<BatchTally> tallies(kBatches);

  parallel_for(kBatches, opts.threads, [&](int b) {
    Engine eng = make_engine(opts.seed, static_cast<std::uint64_t>(b));
    std::normal_distribution<double> normal;
    BatchTally& t = tallies[static_cast<std::size_t>(b)];
    t.samples = opts.samples / kBatches + (b < opts.samples % kBatches ? 1 : 0);
    Eigen::MatrixXd u(n, size);
    Eigen::VectorXd z(n);
    for (long long s = 0; s < t.samples; ++s) {
      for (int i = 0; i < size; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(eng);
        u.col(i).noalias() = pr.chol[pr.shared() ? 0 : static_cast<std::size_t>(i)] * z;
      }
      const Eigen::MatrixXd gram = u * u.transpose();
      bool hit = true;
      for (Eigen::Index k = 0; k < n && hit; ++k) {
        for (Eigen::Index l = k + 1; l < n; ++l) {
          const double overlap = gram(k, l) / std::sqrt(gram(k, k) * gram(l, l));
          if (std::abs(overlap - q(k, l)) > opts.eps) {
            hit = false;
            break;
          }
        }
      }
      if (!hit) continue;
      ++t.hits;
      double logw = 0.0;
      if (pr.weighted) {
        if (pr.shared()) {
          logw = 0.5 * pr.excess[0].cwiseProduct(gram).sum();
        } else {
          for (int i = 0; i < size; ++i) {
            logw += 0.5 * u.col(i).dot(pr.excess[static_cast<std::size_t>(i)] * u.col(i));
          }
        }
        logw += pr.log_const;
      }
      add_log(t, logw + (integrand ? integrand(u, gram) : 0.0));
    }
  });

  FEEstimate est;
  est.eps = opts.eps;
  double log_total = -kInf;
  double shift = -kInf;
  for (const BatchTally& t : tallies) {
    est.n_samples += t.samples;
    est.hits += t.hits;
    BatchTally acc{log_total, 0, 0};
    add_log(acc, t.log_sum);
    log_total = acc.log_sum;
    if (t.log_sum > -kInf) shift = std::max(shift, t.log_sum - std::log(double(t.samples)));
  }
  if (log_total == -kInf) {
    est.value = -kInf;
    est.std_error = kInf;
    return est;
  }
  est.value = (log_total - std::log(static_cast<double>(est.n_samples))) / size;

  Eigen::VectorXd means(kBatches);
  for (int b = 0; b < kBatches; ++b) {
    const BatchTally& t = tallies[static_cast<std::size_t>(b)];
    means(b) = t.log_sum == -kInf ? 0.0
                                  : std::exp(t.log_sum - std::log(double(t.samples)) - shift);
  }
  const double mean = means.mean();
  const double var = (means.array() - mean).square().sum() / (kBatches - 1);
  est.std_error = std::sqrt(var / kBatches) / mean / size;
  return est;
}

double window_sensitivity(const SymMatrix& q, const Eigen::VectorXd* beta) {
  const Eigen::MatrixXd inv = inverse(q).dense();
  double s = 0.0;
  for (Eigen::Index k = 0; k < q.dim(); ++k) {
    for (Eigen::Index l = k + 1; l < q.dim(); ++l) {
      s += std::abs(inv(k, l));
      if (beta) s += 2.0 * (*beta)(k) * (*beta)(l) * std::abs(q(k, l));
    }
  }
  return s;
}

void check_constraint(const SymMatrix& q) {
  for (Eigen::Index k = 0; k < q.dim(); ++k) {
    if (std::abs(q(k, k) - 1.0) > 1e-12) throw InputError("Monte Carlo: Q must have unit diagonal");
  }
  if (!is_positive_definite(q)) throw InputError("Monte Carlo: Q must be positive definite");
}

}  // namespace

FEEstimate estimate_volume(const SymMatrix& q, int size, VolumeMethod method,
                           const McOptions& opts) {
  check_constraint(q);
  if (size < 1) throw InputError("estimate_volume: N must be positive");
  if (!(opts.eps > 0.0)) throw InputError("estimate_volume: eps must be positive");
  if (q.dim() == 1) {
    FEEstimate est;
    est.n_samples = 0;
    est.eps = opts.eps;
    return est;
  }
  const Proposal pr = method == VolumeMethod::direct ? standard_proposal(q.dim())
                                                     : covariance_proposal(q, size);
  FEEstimate est = run_batches(q, size, pr, nullptr, opts);
  est.bias_scale = opts.eps * window_sensitivity(q, nullptr);
  return est;
}

FEEstimate estimate_fe(const DisorderSample& disorder, const ModelParams& p,
                       const Eigen::MatrixXd& fields, const McOptions& opts) {
  const int size = disorder.size();
  const Eigen::Index n = p.n();
  if (fields.rows() != n || fields.cols() != size) {
    throw InputError("estimate_fe: fields must be n x N");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(fields.row(k).norm() - p.hmag()(k)) > 1e-8 * (1.0 + p.hmag()(k))) {
      std::ostringstream os;
      os << "estimate_fe: field row " << k << " has norm " << fields.row(k).norm()
         << ", expected h = " << p.hmag()(k);
      throw InputError(os.str());
    }
  }
  if (opts.tilt < 0.0) throw InputError("estimate_fe: tilt must be >= 0");
  const EigenDecomp& spec = disorder.spectrum();
  // Everything is rotation invariant, so work in eigen-coordinates where
  // H(σ) = N Σ λ_i σ_i².
  const Eigen::MatrixXd rotated = fields * spec.vectors;
  const Eigen::RowVectorXd lambdas = spec.values.transpose();
  const Eigen::VectorXd beta = p.beta();
  const double scale = static_cast<double>(size);

  const Integrand integrand = [&](const Eigen::MatrixXd& u, const Eigen::MatrixXd& gram) {
    double v = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r2 = gram(k, k);
      const double energy = (u.row(k).array().square() * lambdas.array()).sum() / r2;
      v += beta(k) * scale * energy + scale * rotated.row(k).dot(u.row(k)) / std::sqrt(r2);
    }
    return v;
  };
  const Proposal pr = opts.tilt == 0.0 ? covariance_proposal(p.q(), size)
                                       : tilted_proposal(p.q(), spec.values, beta, opts.tilt);
  FEEstimate est = run_batches(p.q(), size, pr, integrand, opts);
  est.bias_scale = opts.eps * window_sensitivity(p.q(), &beta);
  return est;
}

namespace {

// (A A^T)^{-½} A; false on rank loss.
bool polar_retract(Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a * a.transpose());
  const Eigen::VectorXd w = es.eigenvalues();
  if (w.minCoeff() <= 1e-14 * std::max(1.0, w.maxCoeff())) return false;
  a = es.eigenvectors() * w.cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose() * a;
  return true;
}

struct Landscape {
  const Eigen::RowVectorXd thetas;
  const Eigen::VectorXd beta;
  const Eigen::MatrixXd fields;  // n x N
  const Eigen::MatrixXd root;    // Q̃^½

  double value(const Eigen::MatrixXd& m) const {
    double v = 0.0;
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      v += beta(k) * (m.row(k).array().square() * thetas.array()).sum() +
           fields.row(k).dot(m.row(k));
    }
    return v;
  }

  // Riemannian gradient at V with respect to V.
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& v, const Eigen::MatrixXd& m) const {
    Eigen::MatrixXd e = fields;
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      e.row(k).array() += 2.0 * beta(k) * m.row(k).array() * thetas.array();
    }
    const Eigen::MatrixXd z = root * e;
    const Eigen::MatrixXd zv = z * v.transpose();
    return z - 0.5 * (zv + zv.transpose()) * v;
  }
};

bool ascend(const Landscape& ls, Eigen::MatrixXd& v, const AscentOptions& opts, double& out) {
  if (!polar_retract(v)) return false;
  Eigen::MatrixXd m = ls.root * v;
  double f = ls.value(m);
  Eigen::MatrixXd g = ls.gradient(v, m);
  double step = 0.1;
  for (int it = 0; it < opts.iters; ++it) {
    const double gg = g.squaredNorm();
    if (std::sqrt(gg) < opts.grad_tol) break;
    bool moved = false;
    Eigen::MatrixXd trial;
    double ftrial = 0.0;
    for (int ls_it = 0; ls_it < 40; ++ls_it) {
      trial = v + step * g;
      if (polar_retract(trial)) {
        ftrial = ls.value(ls.root * trial);
        if (ftrial >= f + 1e-4 * step * gg) {
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
    const Eigen::MatrixXd mnew = ls.root * trial;
    const Eigen::MatrixXd gnew = ls.gradient(trial, mnew);
    // Barzilai-Borwein step for the next iteration.
    const Eigen::MatrixXd s = trial - v;
    const double sy = -s.cwiseProduct(gnew - g).sum();
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e3) : 0.1;
    const double gain = ftrial - f;
    v = trial;
    m = mnew;
    g = gnew;
    f = ftrial;
    if (gain <= 1e-16 * std::max(1.0, std::abs(f)) && std::sqrt(g.squaredNorm()) < 1e-8) break;
  }
  out = f;
  return std::isfinite(f);
}

}  // namespace

AscentResult ground_state_ascent(const FiniteSystem& sys, const ModelParams& p,
                                 const SymMatrix& qt, const AscentOptions& opts) {
  const Eigen::Index n = p.n();
  const int size = sys.size();
  if (size < n) throw InputError("ground_state_ascent: need N >= n");
  if (qt.dim() != n) throw InputError("ground_state_ascent: Q~ has the wrong dimension");
  if (!is_positive_definite(qt)) throw DomainError("ground_state_ascent: Q~ must be positive definite");
  if (opts.restarts < 1) throw InputError("ground_state_ascent: need at least one restart");
  const Landscape ls{sys.thetas.transpose(), p.beta(), sys.fields(p.hmag()), psd_sqrt(qt).dense()};

  struct Slot {
    bool ok = false;
    double value = -kInf;
    Eigen::MatrixXd v;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(opts.restarts));
  parallel_for(opts.restarts, opts.threads, [&](int r) {
    Engine eng = make_engine(opts.seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd v(n, size);
    for (int i = 0; i < size; ++i)
      for (Eigen::Index k = 0; k < n; ++k) v(k, i) = normal(eng);
    Slot& s = slots[static_cast<std::size_t>(r)];
    s.ok = ascend(ls, v, opts, s.value);
    s.v = std::move(v);
  });

  AscentResult res;
  res.value = -kInf;
  const Slot* best = nullptr;
  for (const Slot& s : slots) {
    if (!s.ok) continue;
    ++res.restarts_ok;
    if (best == nullptr || s.value > best->value) best = &s;
  }
  if (best == nullptr) throw NumericalError("ground_state_ascent: every restart lost rank");
  res.value = best->value;
  res.m = ls.root * best->v;
  return res;
}

AscentResult ground_state_ascent(const DisorderSample& disorder, const Eigen::VectorXd& direction,
                                 const ModelParams& p, const SymMatrix& qt,
                                 const AscentOptions& opts) {
  AscentResult r = ground_state_ascent(finite_system_of(disorder, direction), p, qt, opts);
  r.m = r.m * disorder.spectrum().vectors.transpose();
  return r;
}

}  // namespace sphtap
