#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "neu/baselines/kpca.hpp"
#include "neu/baselines/ola.hpp"
#include "neu/baselines/pca.hpp"
#include "neu/meta/neu.hpp"

namespace neu::harness {

/// Level, slope and curvature factors following AR(1) processes around
/// `mean`, loaded with Nelson-Siegel curves, plus i.i.d. measurement noise.
struct YieldParams {
  double lambda = 0.7308;  // per year
  Eigen::Vector3d mean{4.0, -1.5, 0.5};
  Eigen::Vector3d start_offset{0.5, -0.5, 0.5};
  double phi = 0.99;
  Eigen::Vector3d factor_vol{0.08, 0.10, 0.15};
  double noise_vol = 0.01;
};

inline std::vector<double> default_maturities() { return {0.25, 0.5, 1, 2, 3, 5, 7, 10, 20, 30}; }

inline Matrix nelson_siegel_loadings(const std::vector<double>& maturities, double lambda) {
  Matrix l(static_cast<Index>(maturities.size()), 3);
  for (std::size_t i = 0; i < maturities.size(); ++i) {
    const double x = lambda * maturities[i];
    const double slope = -std::expm1(-x) / x;
    l.row(static_cast<Index>(i)) << 1.0, slope, slope - std::exp(-x);
  }
  return l;
}

/// One row per day, one column per maturity (percent yields).
inline Matrix synth_yield_curve(int n_days, const std::vector<double>& maturities, std::uint64_t seed,
                                const YieldParams& p = {}) {
  if (n_days < 1) throw ConfigurationError("synth_yield_curve: n_days must be >= 1");
  if (maturities.empty()) throw ConfigurationError("synth_yield_curve: no maturities");
  for (std::size_t i = 0; i < maturities.size(); ++i)
    if (!(maturities[i] > 0.0) || (i > 0 && !(maturities[i] > maturities[i - 1])))
      throw ConfigurationError("synth_yield_curve: maturities must be positive and increasing");
  const Matrix load = nelson_siegel_loadings(maturities, p.lambda);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix out(n_days, static_cast<Index>(maturities.size()));
  Eigen::Vector3d f = p.mean + p.start_offset;
  for (int t = 0; t < n_days; ++t) {
    if (t > 0)
      for (int k = 0; k < 3; ++k) f(k) = p.mean(k) + p.phi * (f(k) - p.mean(k)) + p.factor_vol(k) * z(rng);
    out.row(t) = (load * f).transpose();
    if (p.noise_vol > 0.0)
      for (Index j = 0; j < out.cols(); ++j) out(t, j) += p.noise_vol * z(rng);
  }
  return out;
}

enum class PcaMethod { pca, neu_pca, kpca, neu_kpca };

inline const char* to_string(PcaMethod m) {
  switch (m) {
    case PcaMethod::pca: return "pca";
    case PcaMethod::neu_pca: return "neu-pca";
    case PcaMethod::kpca: return "kpca";
    case PcaMethod::neu_kpca: return "neu-kpca";
  }
  return "?";
}

inline PcaMethod parse_pca_method(const std::string& s) {
  if (s == "pca") return PcaMethod::pca;
  if (s == "neu-pca") return PcaMethod::neu_pca;
  if (s == "kpca") return PcaMethod::kpca;
  if (s == "neu-kpca") return PcaMethod::neu_kpca;
  throw ConfigurationError("unknown pca method '" + s + "'");
}

/// Chronological split: training rows first, then validation, then test.
struct PcaSplit {
  int train = 300;
  int validation = 100;
  int test = 100;
};

struct PcaStudyConfig {
  PcaSplit split;
  int k_max = 4;
  std::vector<PcaMethod> methods{PcaMethod::pca, PcaMethod::neu_pca, PcaMethod::kpca, PcaMethod::neu_kpca};
  meta::NeuConfig neu;
  /// Gaussian kernel width; 0 means the median pairwise training distance.
  double kpca_sigma = 0.0;

  PcaStudyConfig() {
    neu.proposals_per_iter = 50;
    neu.max_iters = 40;
    neu.refine_iters = 30;
    neu.patience = 15;
  }
};

/// explained(k - 1, m): cumulative training explained variance with k factors;
/// test_loss(k - 1, m): projection loss on the test block. Columns follow
/// `methods`. kPCA losses live in feature space and compare only with NEU-kPCA.
struct PcaStudyReport {
  std::vector<PcaMethod> methods;
  Matrix explained;
  Matrix test_loss;
  std::vector<std::size_t> chain_lengths;  // NEU-PCA chain per factor count
};

inline PcaStudyReport pca_study(const Matrix& data, const PcaStudyConfig& cfg) {
  const auto& sp = cfg.split;
  if (sp.train < 2 || sp.validation < 1 || sp.test < 1) throw ConfigurationError("pca_study: split lengths must be positive");
  if (data.rows() < sp.train + sp.validation + sp.test)
    throw DomainError("pca_study: data has fewer rows than the split");
  if (cfg.k_max < 1 || cfg.k_max > data.cols()) throw ConfigurationError("pca_study: k_max must lie in [1, D]");
  if (cfg.methods.empty()) throw ConfigurationError("pca_study: no methods");
  const Matrix train = data.topRows(sp.train);
  const Matrix val = data.middleRows(sp.train, sp.validation);
  const Matrix test = data.middleRows(sp.train + sp.validation, sp.test);
  const double sigma = cfg.kpca_sigma > 0.0 ? cfg.kpca_sigma : baselines::median_pairwise_distance(train);
  const Matrix centred = train.rowwise() - train.colwise().mean();
  const double total = centred.squaredNorm();

  PcaStudyReport r;
  r.methods = cfg.methods;
  r.explained = Matrix::Zero(cfg.k_max, static_cast<Index>(cfg.methods.size()));
  r.test_loss = r.explained;
  const auto full = baselines::pca(train, cfg.k_max);
  const auto kfull = baselines::kpca(train, cfg.k_max, sigma);
  const bool need_chain = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                      [](PcaMethod m) { return m == PcaMethod::neu_pca || m == PcaMethod::neu_kpca; });
  for (int k = 1; k <= cfg.k_max; ++k) {
    const auto ola = baselines::pca_ola(k);
    std::optional<meta::NeuResult<geometry::RapidRotation>> neu;
    if (need_chain) {
      meta::NeuConfig nc = cfg.neu;
      nc.seed = cfg.neu.seed + static_cast<std::uint64_t>(k);
      neu = meta::neu_fit<geometry::RapidRotation>(ola, learning::Dataset(train, val), nc);
      r.chain_lengths.push_back(neu->chain.size());
    }
    for (std::size_t j = 0; j < cfg.methods.size(); ++j) {
      const Index row = k - 1, col = static_cast<Index>(j);
      switch (cfg.methods[j]) {
        case PcaMethod::pca:
          r.explained(row, col) = full.explained.head(k).sum();
          r.test_loss(row, col) = baselines::pca_projection_loss(full, k, test);
          break;
        case PcaMethod::neu_pca: {
          const double resid = meta::deconfigured_loss(neu->chain, ola, neu->evaluation.beta_hat, train);
          r.explained(row, col) = total > 0.0 ? 1.0 - resid / total : 1.0;
          r.test_loss(row, col) = meta::deconfigured_loss(neu->chain, ola, neu->evaluation.beta_hat, test);
          break;
        }
        case PcaMethod::kpca:
          r.explained(row, col) = kfull.explained.head(k).sum();
          r.test_loss(row, col) = baselines::kpca_residual_loss(kfull, k, test);
          break;
        case PcaMethod::neu_kpca: {
          // transfer: reuse the NEU-PCA chain, refit kPCA on reconfigured data
          const auto km = baselines::kpca(neu->chain.reconfigure_rows(train), k, sigma);
          r.explained(row, col) = km.explained.head(k).sum();
          r.test_loss(row, col) = baselines::kpca_residual_loss(km, k, neu->chain.reconfigure_rows(test));
          break;
        }
      }
    }
  }
  return r;
}

inline std::string pca_table_csv(const PcaStudyReport& r, const Matrix& values, const std::string& label) {
  std::ostringstream os;
  os << std::setprecision(10) << "factors";
  for (auto m : r.methods) os << ',' << to_string(m) << '_' << label;
  os << '\n';
  for (Index k = 0; k < values.rows(); ++k) {
    os << k + 1;
    for (Index j = 0; j < values.cols(); ++j) os << ',' << values(k, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace neu::harness
