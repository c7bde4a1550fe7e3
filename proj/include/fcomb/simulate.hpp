#pragma once

// Seedable dataset generators with known ground truth. Three families: a
// combined-component model whose glued eigenfunctions couple an amplitude
// bump with a phase polynomial, a two-block canonical-correlation model
// with a single correlated score pair, and one-component toy models whose
// amplitude/phase score association is linear or quadratic. Every draw is
// reproducible from the seed; samples use independent substreams so the
// result does not depend on generation order.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/rng.hpp>
#include <fcomb/warp.hpp>

namespace fcomb {

enum class SimModel { pca_model, cca_model, toy_linear, toy_quadratic };

inline std::string to_string(SimModel m) {
  switch (m) {
    case SimModel::pca_model: return "pca";
    case SimModel::cca_model: return "cca";
    case SimModel::toy_linear: return "toy_linear";
    case SimModel::toy_quadratic: return "toy_quadratic";
  }
  throw invalid_input("unknown simulation model");
}

inline SimModel sim_model_from_string(const std::string& s) {
  if (s == "pca") return SimModel::pca_model;
  if (s == "cca") return SimModel::cca_model;
  if (s == "toy_linear") return SimModel::toy_linear;
  if (s == "toy_quadratic") return SimModel::toy_quadratic;
  throw invalid_input("unknown simulation model: " + s);
}

struct SimConfig {
  int n = 0;
  int k = 101;
  std::uint64_t seed = 0;
  double noise_sd = 0.31622776601683794;  // variance 0.1
  SimModel model = SimModel::pca_model;
};

struct SimDataset {
  TimeGrid grid;
  std::vector<SampledCurve> fs;       // observed: true curve plus iid noise
  std::vector<SampledCurve> fs_true;  // noiseless composed curves
  std::vector<SampledCurve> ys_true;  // generating amplitudes
  std::vector<TangentFunction> xs_true;  // generating phase tangents
  Mat scores_true;  // one row per sample, one column per generating score
  int resampled = 0;  // draws redone because a phase left the warp domain
};

namespace detail {

inline double bump(double t, double center, double width) {
  const double u = (t - center) / width;
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846);
}

// Two-bump mean amplitude curve.
inline Vec sim_mean(const TimeGrid& g) {
  Vec mu(g.k());
  for (int j = 0; j < g.k(); ++j)
    mu(j) = 20.0 * (bump(g.t(j), 0.35, 0.05) + bump(g.t(j), 0.65, 0.05));
  return mu;
}

// Two passes of modified Gram-Schmidt under the quadrature inner product;
// the second pass repairs the roundoff the first one leaves behind.
inline void orthonormalize(const TimeGrid& g, std::vector<Vec>& fns) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < fns.size(); ++i) {
      for (std::size_t l = 0; l < i; ++l)
        fns[i] -= inner(g, fns[l], fns[i]) * fns[l];
      const double nm = l2norm(g, fns[i]);
      if (!(nm > 1e-12))
        throw invalid_input("generator basis degenerates on this grid");
      fns[i] /= nm;
    }
  }
}

// Orthonormal amplitude directions built from localized bumps.
inline std::vector<Vec> amplitude_basis(const TimeGrid& g) {
  const int k = g.k();
  std::vector<Vec> fns(4, Vec(k));
  for (int j = 0; j < k; ++j) {
    const double t = g.t(j);
    fns[0](j) = bump(t, 0.35, 0.05);
    fns[1](j) = bump(t, 0.65, 0.05);
    fns[2](j) = bump(t, 0.5, 0.1);
    fns[3](j) = bump(t, 0.3, 0.1) + bump(t, 0.7, 0.1);
  }
  orthonormalize(g, fns);
  return fns;
}

// Orthonormal phase directions from centered monomials; centering keeps
// them valid tangent functions (zero integral).
inline std::vector<Vec> phase_basis(const TimeGrid& g) {
  const int k = g.k();
  std::vector<Vec> fns(4, Vec(k));
  for (int j = 0; j < k; ++j) {
    const double u = g.t(j) - 0.5;
    fns[0](j) = u;
    fns[1](j) = u * u;
    fns[2](j) = u * u * u;
    fns[3](j) = u * u * u * u;
  }
  for (Vec& f : fns) f.array() -= trapz(g, f);
  orthonormalize(g, fns);
  return fns;
}

}  // namespace detail

// Ground truth of the combined-component model: four glued components,
// each pairing one amplitude direction with one phase direction. The
// within-component phase share is chosen so the phase variances stay small
// enough for essentially every draw to compose.
struct PcaModelTruth {
  TimeGrid grid;
  Vec mean_glued;   // 2k values; phase half is zero
  Mat components;   // 2k x 4, orthonormal under the glued quadrature
  Vec variances;    // score variances of the four components
  Vec phase_variances;  // variance each component contributes to the phase
};

inline PcaModelTruth pca_truth(const TimeGrid& g) {
  const int k = g.k();
  PcaModelTruth truth;
  truth.grid = g;
  truth.mean_glued = Vec::Zero(2 * k);
  truth.mean_glued.head(k) = detail::sim_mean(g);
  truth.variances = Vec(4);
  truth.variances << 3.5, 2.6, 0.3, 0.1;
  truth.phase_variances = Vec(4);
  truth.phase_variances << 0.01, 0.007, 0.0016, 0.0014;
  const std::vector<Vec> amps = detail::amplitude_basis(g);
  const std::vector<Vec> phas = detail::phase_basis(g);
  truth.components = Mat::Zero(2 * k, 4);
  for (int j = 0; j < 4; ++j) {
    const double phase_share =
        std::sqrt(truth.phase_variances(j) / truth.variances(j));
    const double amp_share = std::sqrt(1.0 - phase_share * phase_share);
    truth.components.col(j).head(k) = amp_share * amps[j];
    truth.components.col(j).tail(k) = phase_share * phas[j];
  }
  return truth;
}

// Ground truth of the canonical-correlation model: separate amplitude and
// phase component systems with exactly one correlated score pair.
struct CcaModelTruth {
  TimeGrid grid;
  Vec mean_y;
  Mat amp_components;    // k x 4
  Mat phase_components;  // k x 4
  Vec amp_variances;
  Vec phase_variances;
  int amp_index = 0;    // which amplitude score is correlated
  int phase_index = 1;  // which phase score it is correlated with
  double correlation = 0.8;
};

inline CcaModelTruth cca_truth(const TimeGrid& g) {
  CcaModelTruth truth;
  truth.grid = g;
  truth.mean_y = detail::sim_mean(g);
  const std::vector<Vec> amps = detail::amplitude_basis(g);
  const std::vector<Vec> phas = detail::phase_basis(g);
  truth.amp_components = Mat(g.k(), 4);
  truth.phase_components = Mat(g.k(), 4);
  for (int j = 0; j < 4; ++j) {
    truth.amp_components.col(j) = amps[j];
    truth.phase_components.col(j) = phas[j];
  }
  truth.amp_variances = Vec(4);
  truth.amp_variances << 5.0, 3.5, 0.8, 0.7;
  truth.phase_variances = Vec(4);
  truth.phase_variances << 0.01, 0.007, 0.0016, 0.0014;
  return truth;
}

namespace detail {

// Compose one sample, redrawing its scores while the phase leaves the warp
// domain. draw fills the score vector from the stream; build maps scores to
// the amplitude/phase pair.
template <typename DrawFn, typename BuildFn>
inline void generate_sample(Rng& rng, Vec& scores, SampledCurve& y,
                            TangentFunction& x, SampledCurve& f_true,
                            int& resampled, DrawFn&& draw, BuildFn&& build) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    draw(rng, scores);
    build(scores, y, x);
    try {
      f_true = compose_amplitude_phase(y, x);
      return;
    } catch (const domain_exit&) {
      ++resampled;
    }
  }
  throw domain_exit(
      "simulated phase leaves the warp domain in 1000 consecutive draws; "
      "the configured variances are far outside the admissible range",
      0.0);
}

inline void add_noise(Rng& rng, const SampledCurve& f_true, double noise_sd,
                      SampledCurve& f_obs) {
  f_obs.grid = f_true.grid;
  f_obs.v = f_true.v;
  for (int j = 0; j < f_obs.v.size(); ++j) f_obs.v(j) += noise_sd * rng.normal();
}

inline void check_config(const SimConfig& config) {
  if (config.n < 2) throw invalid_input("simulation needs at least two samples");
  if (config.k < 4) throw invalid_input("simulation grid needs at least four points");
  if (!(config.noise_sd >= 0.0)) throw invalid_input("noise sd must be nonnegative");
}

}  // namespace detail

inline SimDataset gen_pca_dataset(const SimConfig& config) {
  detail::check_config(config);
  const TimeGrid g = TimeGrid::uniform(config.k);
  const PcaModelTruth truth = pca_truth(g);
  const int k = g.k();

  SimDataset ds;
  ds.grid = g;
  ds.scores_true = Mat(config.n, 4);
  ds.fs.resize(config.n);
  ds.fs_true.resize(config.n);
  ds.ys_true.resize(config.n, SampledCurve{g, Vec()});
  ds.xs_true.resize(config.n, TangentFunction{g, Vec::Zero(k)});

  for (int i = 0; i < config.n; ++i) {
    Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
    Vec z(4);
    detail::generate_sample(
        rng, z, ds.ys_true[i], ds.xs_true[i], ds.fs_true[i], ds.resampled,
        [](Rng& r, Vec& s) {
          for (int j = 0; j < 4; ++j) s(j) = r.normal();
        },
        [&](const Vec& s, SampledCurve& y, TangentFunction& x) {
          Vec glued = truth.mean_glued;
          for (int j = 0; j < 4; ++j)
            glued += s(j) * std::sqrt(truth.variances(j)) * truth.components.col(j);
          y = SampledCurve{g, glued.head(k)};
          x = TangentFunction{g, glued.tail(k)};
        });
    ds.scores_true.row(i) = z.transpose();
    detail::add_noise(rng, ds.fs_true[i], config.noise_sd, ds.fs[i]);
  }
  return ds;
}

inline SimDataset gen_cca_dataset(const SimConfig& config) {
  detail::check_config(config);
  const TimeGrid g = TimeGrid::uniform(config.k);
  const CcaModelTruth truth = cca_truth(g);
  const double cross = truth.correlation;
  const double resid = std::sqrt(1.0 - cross * cross);

  SimDataset ds;
  ds.grid = g;
  ds.scores_true = Mat(config.n, 8);
  ds.fs.resize(config.n);
  ds.fs_true.resize(config.n);
  ds.ys_true.resize(config.n, SampledCurve{g, Vec()});
  ds.xs_true.resize(config.n, TangentFunction{g, Vec::Zero(g.k())});

  for (int i = 0; i < config.n; ++i) {
    Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
    Vec scores(8);  // four amplitude scores, then four phase scores
    detail::generate_sample(
        rng, scores, ds.ys_true[i], ds.xs_true[i], ds.fs_true[i], ds.resampled,
        [&](Rng& r, Vec& s) {
          for (int j = 0; j < 4; ++j) s(j) = r.normal();
          for (int j = 4; j < 8; ++j) s(j) = r.normal();
          // The one correlated pair: rebuild the phase score from the
          // amplitude score and an independent residual.
          s(4 + truth.phase_index) = cross * s(truth.amp_index) +
                                     resid * s(4 + truth.phase_index);
        },
        [&](const Vec& s, SampledCurve& y, TangentFunction& x) {
          Vec yv = truth.mean_y;
          Vec xv = Vec::Zero(g.k());
          for (int j = 0; j < 4; ++j) {
            yv += s(j) * std::sqrt(truth.amp_variances(j)) *
                  truth.amp_components.col(j);
            xv += s(4 + j) * std::sqrt(truth.phase_variances(j)) *
                  truth.phase_components.col(j);
          }
          y = SampledCurve{g, std::move(yv)};
          x = TangentFunction{g, std::move(xv)};
        });
    ds.scores_true.row(i) = scores.transpose();
    detail::add_noise(rng, ds.fs_true[i], config.noise_sd, ds.fs[i]);
  }
  return ds;
}

inline SimDataset gen_toy_dataset(const SimConfig& config) {
  detail::check_config(config);
  if (config.model != SimModel::toy_linear &&
      config.model != SimModel::toy_quadratic)
    throw invalid_input("toy generator expects a toy model");
  const bool quadratic = config.model == SimModel::toy_quadratic;
  const TimeGrid g = TimeGrid::uniform(config.k);
  // Doubled mean height keeps the bumps clearly positive under the amplitude
  // variance, so alignment stays well posed for the toy comparisons.
  const Vec mu = 2.0 * detail::sim_mean(g);
  const Vec amp_dir = detail::amplitude_basis(g)[0];
  const Vec phase_dir = detail::phase_basis(g)[0];
  const double amp_sd = std::sqrt(3.0);
  const double phase_sd = 0.1;

  SimDataset ds;
  ds.grid = g;
  ds.scores_true = Mat(config.n, 2);
  ds.fs.resize(config.n);
  ds.fs_true.resize(config.n);
  ds.ys_true.resize(config.n, SampledCurve{g, Vec()});
  ds.xs_true.resize(config.n, TangentFunction{g, Vec::Zero(g.k())});

  for (int i = 0; i < config.n; ++i) {
    Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
    Vec s(2);
    detail::generate_sample(
        rng, s, ds.ys_true[i], ds.xs_true[i], ds.fs_true[i], ds.resampled,
        [&](Rng& r, Vec& sc) {
          const double sy = r.normal();
          sc(0) = sy;
          sc(1) = quadratic ? (sy * sy - 1.0) / std::sqrt(2.0)
                            : 0.95 * sy + 0.31 * r.normal();
        },
        [&](const Vec& sc, SampledCurve& y, TangentFunction& x) {
          y = SampledCurve{g, mu + sc(0) * amp_sd * amp_dir};
          x = TangentFunction{g, sc(1) * phase_sd * phase_dir};
        });
    ds.scores_true.row(i) = s.transpose();
    detail::add_noise(rng, ds.fs_true[i], config.noise_sd, ds.fs[i]);
  }
  return ds;
}

inline SimDataset gen_dataset(const SimConfig& config) {
  switch (config.model) {
    case SimModel::pca_model: return gen_pca_dataset(config);
    case SimModel::cca_model: return gen_cca_dataset(config);
    case SimModel::toy_linear:
    case SimModel::toy_quadratic: return gen_toy_dataset(config);
  }
  throw invalid_input("unknown simulation model");
}

}  // namespace fcomb
