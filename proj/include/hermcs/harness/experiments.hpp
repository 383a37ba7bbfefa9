#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hermcs/basis.hpp"
#include "hermcs/detect.hpp"
#include "hermcs/error.hpp"
#include "hermcs/parallel.hpp"
#include "hermcs/random.hpp"
#include "hermcs/sampling.hpp"
#include "hermcs/stats.hpp"
#include "hermcs/transform.hpp"
#include "hermcs/harness/config.hpp"
#include "hermcs/harness/csv.hpp"
#include "hermcs/harness/ks.hpp"
#include "hermcs/harness/svg.hpp"

#ifndef HERMCS_VERSION
#define HERMCS_VERSION "0.1.0"
#endif

namespace hermcs::harness {

inline constexpr int kTrialBatch = 64;

// Seeding: sweep point s uses the stream stream_seed(master, s); trial t of
// that point draws its mask from trial_seed(stream, t).

namespace detail {

inline std::string metadata(const ExperimentConfig& c) {
  return std::string("hermcs ") + HERMCS_VERSION + " experiment=" + std::string(to_string(c.id)) + " " +
         describe(c);
}

inline std::filesystem::path out_file(const ExperimentConfig& c, const std::string& name) {
  return c.out_dir / name;
}

/// Columns of `z` become 0/1 indicators of the masks for trials [first, first + z.cols()).
inline void fill_mask_batch(Eigen::MatrixXd& z, int M, int M_A, std::uint64_t stream, int first) {
  z.setZero();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const SamplingMask mask = random_mask(M, M_A, trial_seed(stream, static_cast<std::uint64_t>(first + j)));
    for (int m : mask.available()) z(m, j) = 1.0;
  }
}

inline int batch_count(int trials) { return (trials + kTrialBatch - 1) / kTrialBatch; }

inline int batch_size(int trials, int b) { return std::min(kTrialBatch, trials - b * kTrialBatch); }

/// F diag(w ∘ s): multiplying by a mask indicator gives the zero-filled coefficients of s.
inline Eigen::MatrixXd coefficient_operator(const HermiteBasis& basis, const Eigen::VectorXd& samples) {
  return basis.table() * basis.weights().cwiseProduct(samples).asDiagonal();
}

inline std::vector<int> all_orders(int M) {
  std::vector<int> v(static_cast<std::size_t>(M));
  for (int p = 0; p < M; ++p) v[static_cast<std::size_t>(p)] = p;
  return v;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void require_id(const ExperimentConfig& c, std::initializer_list<ExperimentId> ids, const char* op) {
  for (auto id : ids) {
    if (c.id == id) return;
  }
  throw InvalidArgument(std::string(op) + " cannot run experiment " + std::string(to_string(c.id)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Variance of the signal coefficient (ex1a, ex1b, ex2)

struct VarianceRow {
  int M_A = 0;
  int p0 = 0;
  double theoretical_37 = 0.0;  // exact variance, full-grid energy
  double estimated_38 = 0.0;    // mask-based estimate averaged over trials
  double empirical = 0.0;
  double empirical_sd = 0.0;  // sampling SD of `empirical`, from the fourth moment
  double estimated_sd = 0.0;  // standard error of `estimated_38`
};

struct VarianceMse {
  int M_A = 0;
  double mse_37 = 0.0;
  double mse_38 = 0.0;
};

struct NoiseRow {
  int p0 = 0;
  int M_A = 0;
  double theoretical_27 = 0.0;
  double empirical = 0.0;  // averaged over the non-signal positions
};

struct VarianceSweepResult {
  std::vector<VarianceRow> rows;
  std::vector<VarianceMse> mse;
  std::vector<NoiseRow> noise;  // ex2 only
  double max_mse_37 = 0.0;
  double max_mse_38 = 0.0;
  std::vector<std::filesystem::path> files;
};

/// Mono-component signal ψ_{p0} with unit amplitude. For every M_A of the
/// sweep and every p0, `trials` masks give the empirical variance of c_{p0},
/// which is compared with the exact law and with the mask-based estimate.
inline VarianceSweepResult run_variance_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  detail::require_id(cfg, {ExperimentId::kEx1a, ExperimentId::kEx1b, ExperimentId::kEx2}, "run_variance_sweep");
  const int M = cfg.M;
  const int T = cfg.trials;
  const HermiteBasis basis = build_basis(M);
  const std::vector<int> p0s = cfg.p0_list.empty() ? detail::all_orders(M) : cfg.p0_list;
  const auto P = static_cast<Eigen::Index>(p0s.size());
  const bool with_noise = cfg.id == ExperimentId::kEx2;

  // For a unit component at p0: c_{p0} = Σ_m Q(p0, m) z_m, P̃_{p0} = Σ_m R(p0, m) z_m.
  const Eigen::ArrayXXd sq = basis.table().array().square();
  const Eigen::ArrayXXd ratio = sq.rowwise() / sq.row(M - 1);
  Eigen::MatrixXd Q(P, M), R(P, M);
  for (Eigen::Index k = 0; k < P; ++k) {
    const int p0 = p0s[static_cast<std::size_t>(k)];
    Q.row(k) = sq.row(p0) * basis.weights().transpose().array();
    R.row(k) = ratio.row(p0).square();
  }
  std::vector<Eigen::MatrixXd> G;
  if (with_noise) {
    for (int p0 : p0s) G.push_back(detail::coefficient_operator(basis, basis.table().row(p0).transpose()));
  }
  std::vector<double> full_energy;
  for (int p0 : p0s) full_energy.push_back(component_energy(p0, basis));

  VarianceSweepResult out;
  for (std::size_t s = 0; s < cfg.ma_values.size(); ++s) {
    const int M_A = cfg.ma_values[s];
    const std::uint64_t stream = stream_seed(cfg.seed, s);
    const double mu = static_cast<double>(M_A) / M;
    struct Acc {
      Eigen::VectorXd sd, sd2, sd4, est, est2;
      Eigen::MatrixXd noise2;
    };
    const int batches = detail::batch_count(T);
    std::vector<Acc> acc(static_cast<std::size_t>(batches));
    parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
      const int first = static_cast<int>(b) * kTrialBatch;
      Eigen::MatrixXd z(M, detail::batch_size(T, static_cast<int>(b)));
      detail::fill_mask_batch(z, M, M_A, stream, first);
      const Eigen::ArrayXXd d = (Q * z).array() - mu;
      const Eigen::MatrixXd e = R * z;
      Acc& a = acc[b];
      a.sd = d.rowwise().sum();
      a.sd2 = d.square().rowwise().sum();
      a.sd4 = d.square().square().rowwise().sum();
      const Eigen::ArrayXXd v = e.unaryExpr([&](double p) { return signal_variance_from_energy(p, M, M_A, 1.0); });
      a.est = v.rowwise().sum();
      a.est2 = v.square().rowwise().sum();
      if (with_noise) {
        a.noise2.resize(M, P);
        for (Eigen::Index k = 0; k < P; ++k) {
          Eigen::MatrixXd c = G[static_cast<std::size_t>(k)] * z;
          c.row(p0s[static_cast<std::size_t>(k)]).setZero();
          a.noise2.col(k) = c.array().square().rowwise().sum();
        }
      }
    });
    Eigen::VectorXd sd = Eigen::VectorXd::Zero(P), sd2 = sd, sd4 = sd, est = sd, est2 = sd;
    Eigen::MatrixXd noise2 = Eigen::MatrixXd::Zero(M, with_noise ? P : 0);
    for (const Acc& a : acc) {
      sd += a.sd;
      sd2 += a.sd2;
      sd4 += a.sd4;
      est += a.est;
      est2 += a.est2;
      if (with_noise) noise2 += a.noise2;
    }

    VarianceMse point{M_A, 0.0, 0.0};
    for (Eigen::Index k = 0; k < P; ++k) {
      VarianceRow row;
      row.M_A = M_A;
      row.p0 = p0s[static_cast<std::size_t>(k)];
      row.theoretical_37 =
          M_A == M ? 0.0
                   : unit_noise_variance(M, M_A) * std::max(full_energy[static_cast<std::size_t>(k)] / M - 1.0, 0.0);
      row.estimated_38 = est(k) / T;
      row.empirical = T > 1 ? std::max(sd2(k) - sd(k) * sd(k) / T, 0.0) / (T - 1) : 0.0;
      // d is centred on the exact mean μ, so these are unbiased moment estimates
      const double m2 = sd2(k) / T;
      row.empirical_sd = std::sqrt(std::max(sd4(k) / T - m2 * m2, 0.0) / T);
      row.estimated_sd = std::sqrt(std::max(est2(k) / T - row.estimated_38 * row.estimated_38, 0.0) / T);
      point.mse_37 += (row.empirical - row.theoretical_37) * (row.empirical - row.theoretical_37);
      point.mse_38 += (row.empirical - row.estimated_38) * (row.empirical - row.estimated_38);
      out.rows.push_back(row);
      if (with_noise) {
        out.noise.push_back({row.p0, M_A, unit_noise_variance(M, M_A), noise2.col(k).sum() / T / (M - 1)});
      }
    }
    point.mse_37 /= static_cast<double>(P);
    point.mse_38 /= static_cast<double>(P);
    out.max_mse_37 = std::max(out.max_mse_37, point.mse_37);
    out.max_mse_38 = std::max(out.max_mse_38, point.mse_38);
    out.mse.push_back(point);
  }

  const std::string meta = detail::metadata(cfg);
  const std::string id(to_string(cfg.id));
  {
    CsvWriter w(detail::out_file(cfg, id + "_variance.csv"), meta,
                {"M_A", "p0", "theoretical_var_37", "estimated_var_38", "empirical_var", "mse_37", "mse_38"});
    for (const auto& r : out.rows) {
      const double e37 = r.empirical - r.theoretical_37;
      const double e38 = r.empirical - r.estimated_38;
      w.row(r.M_A, r.p0, r.theoretical_37, r.estimated_38, r.empirical, e37 * e37, e38 * e38);
    }
    w.comment("summary max_mse_37=" + format_number(out.max_mse_37) + " max_mse_38=" + format_number(out.max_mse_38));
    out.files.push_back(w.path());
  }
  if (with_noise) {
    CsvWriter w(detail::out_file(cfg, "ex2_noise_variance.csv"), meta,
                {"p0", "M_A", "theoretical_noise_var_27", "empirical_noise_var"});
    for (const auto& r : out.noise) w.row(r.p0, r.M_A, r.theoretical_27, r.empirical);
    out.files.push_back(w.path());
  } else {
    CsvWriter w(detail::out_file(cfg, id + "_mse.csv"), meta, {"M_A", "mse_37", "mse_38"});
    for (const auto& m : out.mse) w.row(m.M_A, m.mse_37, m.mse_38);
    out.files.push_back(w.path());
  }

  if (cfg.svg) {
    if (with_noise) {
      std::vector<Series> var_series, noise_series;
      for (std::size_t k = 0; k < p0s.size(); ++k) {
        Series emp{"empirical p0=" + std::to_string(p0s[k]), {}, {}}, th{"estimate p0=" + std::to_string(p0s[k]), {}, {}, true};
        Series ne{"empirical p0=" + std::to_string(p0s[k]), {}, {}};
        for (std::size_t s = 0; s < cfg.ma_values.size(); ++s) {
          const auto& r = out.rows[s * p0s.size() + k];
          emp.x.push_back(r.M_A);
          emp.y.push_back(r.empirical);
          th.x.push_back(r.M_A);
          th.y.push_back(r.estimated_38);
          ne.x.push_back(r.M_A);
          ne.y.push_back(out.noise[s * p0s.size() + k].empirical);
        }
        var_series.push_back(emp);
        var_series.push_back(th);
        noise_series.push_back(ne);
      }
      Series nt{"theory", {}, {}, true};
      for (std::size_t s = 0; s < cfg.ma_values.size(); ++s) {
        nt.x.push_back(out.noise[s * p0s.size()].M_A);
        nt.y.push_back(out.noise[s * p0s.size()].theoretical_27);
      }
      noise_series.push_back(nt);
      write_svg_chart(detail::out_file(cfg, "ex2_variance.svg"), "signal coefficient variance", "M_A", "variance",
                      var_series);
      write_svg_chart(detail::out_file(cfg, "ex2_noise_variance.svg"), "non-signal coefficient variance", "M_A",
                      "variance", noise_series);
    } else {
      Series a{"MSE exact law", {}, {}, true}, b{"MSE mask estimate", {}, {}};
      for (const auto& m : out.mse) {
        a.x.push_back(m.M_A);
        a.y.push_back(m.mse_37);
        b.x.push_back(m.M_A);
        b.y.push_back(m.mse_38);
      }
      write_svg_chart(detail::out_file(cfg, id + "_mse.svg"), "variance MSE, M=" + std::to_string(M), "M_A", "MSE",
                      {a, b}, true);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Misdetection probability (ex3)

struct MisdetectionRow {
  int M_A = 0;
  int component = 0;  // 1-based
  double p_exact = 0.0;
  double p_approx = 0.0;
  double p_empirical = 0.0;
};

struct MisdetectionSweepResult {
  std::vector<MisdetectionRow> rows;
  std::vector<std::filesystem::path> files;
};

/// Per component: model misdetection probability (numerical integral and the
/// 1.5σ approximation) next to the fraction of trials in which some
/// non-signal |c_p| reaches |c_{p_i}|.
inline MisdetectionSweepResult run_misdetection_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  detail::require_id(cfg, {ExperimentId::kEx3}, "run_misdetection_sweep");
  const int M = cfg.M;
  const int T = cfg.trials;
  const HermiteBasis basis = build_basis(M);
  const SparseSignalSpec spec = cfg.signal();
  const int K = spec.sparsity();
  hermcs::detail::require(K < M, "need fewer components than positions");
  const Eigen::MatrixXd G = detail::coefficient_operator(basis, synthesize(spec, basis).values());
  std::vector<char> is_signal(static_cast<std::size_t>(M), 0);
  for (int p : spec.orders()) is_signal[static_cast<std::size_t>(p)] = 1;
  const std::vector<int> orders = spec.orders();

  MisdetectionSweepResult out;
  for (std::size_t s = 0; s < cfg.ma_values.size(); ++s) {
    const int M_A = cfg.ma_values[s];
    const std::uint64_t stream = stream_seed(cfg.seed, s);
    const int batches = detail::batch_count(T);
    std::vector<std::vector<int>> counts(static_cast<std::size_t>(batches), std::vector<int>(static_cast<std::size_t>(K), 0));
    parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
      Eigen::MatrixXd z(M, detail::batch_size(T, static_cast<int>(b)));
      detail::fill_mask_batch(z, M, M_A, stream, static_cast<int>(b) * kTrialBatch);
      const Eigen::MatrixXd c = (G * z).cwiseAbs();
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        double noise_max = 0.0;
        for (int p = 0; p < M; ++p) {
          if (!is_signal[static_cast<std::size_t>(p)]) noise_max = std::max(noise_max, c(p, j));
        }
        for (int i = 0; i < K; ++i) {
          if (noise_max >= c(orders[static_cast<std::size_t>(i)], j)) ++counts[b][static_cast<std::size_t>(i)];
        }
      }
    });
    std::vector<int> total(static_cast<std::size_t>(K), 0);
    for (const auto& v : counts) {
      for (int i = 0; i < K; ++i) total[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
    }
    const ComponentStatistics stats = multi_component_stats(spec, basis, M_A);
    for (int i = 0; i < K; ++i) {
      out.rows.push_back({M_A, i + 1, misdetection_probability_exact(i, stats, K),
                          misdetection_probability_approx(i, stats, K),
                          static_cast<double>(total[static_cast<std::size_t>(i)]) / T});
    }
  }

  {
    CsvWriter w(detail::out_file(cfg, "ex3_misdetection.csv"), detail::metadata(cfg),
                {"M_A", "component", "p_exact_51", "p_approx_52", "p_empirical"});
    for (const auto& r : out.rows) w.row(r.M_A, r.component, r.p_exact, r.p_approx, r.p_empirical);
    out.files.push_back(w.path());
  }
  if (cfg.svg) {
    std::vector<Series> series;
    for (int i = 0; i < K; ++i) {
      Series ex{"exact P" + std::to_string(i + 1), {}, {}}, em{"empirical P" + std::to_string(i + 1), {}, {}, true};
      for (const auto& r : out.rows) {
        if (r.component != i + 1) continue;
        ex.x.push_back(r.M_A);
        ex.y.push_back(r.p_exact);
        em.x.push_back(r.M_A);
        em.y.push_back(r.p_empirical);
      }
      series.push_back(ex);
      series.push_back(em);
    }
    write_svg_chart(detail::out_file(cfg, "ex3_misdetection.svg"), "misdetection probability", "M_A", "probability",
                    series);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threshold (ex4)

struct ThresholdRealization {
  int M_A = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd magnitudes;  // |c_p|
  double threshold = 0.0;
  std::vector<bool> component_above;
};

struct DetectionRate {
  int M_A = 0;
  int component = 0;  // 1-based
  int order = 0;
  double amplitude = 0.0;
  double detection_rate = 0.0;
  double all_detected_rate = 0.0;
};

struct ThresholdDemoResult {
  std::vector<ThresholdRealization> realizations;  // trial 0 of each M_A
  std::vector<DetectionRate> rates;                // over all trials
  std::vector<std::filesystem::path> files;
};

/// The threshold the reconstruction pipeline would set (σ_N estimated from the
/// zero-filled coefficients, closed-form T) against the coefficient magnitudes.
inline ThresholdDemoResult run_threshold_demo(const ExperimentConfig& cfg) {
  validate(cfg);
  detail::require_id(cfg, {ExperimentId::kEx4}, "run_threshold_demo");
  const int M = cfg.M;
  const int T = cfg.trials;
  const HermiteBasis basis = build_basis(M);
  const SparseSignalSpec spec = cfg.signal();
  const SampleVector signal = synthesize(spec, basis);
  const auto& comps = spec.components();
  const auto K = comps.size();
  const std::string meta = detail::metadata(cfg);

  ThresholdDemoResult out;
  for (std::size_t s = 0; s < cfg.ma_values.size(); ++s) {
    const int M_A = cfg.ma_values[s];
    const std::uint64_t stream = stream_seed(cfg.seed, s);
    std::vector<ThresholdRealization> trials(static_cast<std::size_t>(T));
    parallel_for(trials.size(), [&](std::size_t t) {
      ThresholdRealization& r = trials[t];
      r.M_A = M_A;
      r.seed = trial_seed(stream, t);
      const Measurement meas = measure(signal, random_mask(M, M_A, r.seed));
      const CoefficientVector c0 = initial_estimate(meas, basis);
      const double sigma = estimate_sigma_from_coefficients(c0, M, M_A);
      r.threshold = threshold_closed_form(ThresholdSpec{cfg.pnn, M, 0, sigma});
      r.magnitudes = c0.values().cwiseAbs();
      for (const auto& c : comps) r.component_above.push_back(r.magnitudes(c.order) > r.threshold);
    });

    int all = 0;
    std::vector<int> hits(K, 0);
    for (const auto& r : trials) {
      bool every = true;
      for (std::size_t i = 0; i < K; ++i) {
        hits[i] += r.component_above[i] ? 1 : 0;
        every = every && r.component_above[i];
      }
      all += every ? 1 : 0;
    }
    for (std::size_t i = 0; i < K; ++i) {
      out.rates.push_back({M_A, static_cast<int>(i) + 1, comps[i].order, comps[i].amplitude,
                           static_cast<double>(hits[i]) / T, static_cast<double>(all) / T});
    }

    const ThresholdRealization& first = trials.front();
    CsvWriter w(detail::out_file(cfg, "ex4_threshold_MA" + std::to_string(M_A) + ".csv"), meta,
                {"p", "|c_p|", "threshold"});
    for (int p = 0; p < M; ++p) w.row(p, first.magnitudes(p), first.threshold);
    std::string above;
    for (std::size_t i = 0; i < K; ++i) {
      if (first.component_above[i]) above += (above.empty() ? "" : " ") + std::to_string(comps[i].order);
    }
    w.comment("realization seed=" + std::to_string(first.seed) + " orders_above_threshold=[" + above + "]");
    out.files.push_back(w.path());
    if (cfg.svg) {
      Series bars{"|c_p|", {}, {}, false, true}, thr{"threshold", {0.0, M - 1.0}, {first.threshold, first.threshold}};
      for (int p = 0; p < M; ++p) {
        bars.x.push_back(p);
        bars.y.push_back(first.magnitudes(p));
      }
      write_svg_chart(detail::out_file(cfg, "ex4_threshold_MA" + std::to_string(M_A) + ".svg"),
                      "coefficients and threshold, M_A=" + std::to_string(M_A), "p", "|c_p|", {bars, thr});
    }
    out.realizations.push_back(first);
  }

  {
    CsvWriter w(detail::out_file(cfg, "ex4_detection_rates.csv"), meta,
                {"M_A", "component", "order", "amplitude", "detection_rate", "all_detected_rate"});
    for (const auto& r : out.rates) w.row(r.M_A, r.component, r.order, r.amplitude, r.detection_rate, r.all_detected_rate);
    out.files.push_back(w.path());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction (ex5)

struct ReconstructionTrial {
  std::uint64_t seed = 0;
  bool support_exact_match = false;
  double signal_mse = 0.0;
  ReconstructionStatus status = ReconstructionStatus::kOk;
  std::vector<int> support;
};

struct ReconstructionDemoResult {
  std::vector<ReconstructionTrial> trials;
  int successes = 0;
  double success_fraction = 0.0;
  double median_success_mse = 0.0;  // NaN when nothing succeeded
  double max_success_mse = 0.0;
  std::vector<std::filesystem::path> files;
};

/// The full pipeline on independent masks of size M_A (first sweep value).
inline ReconstructionDemoResult run_reconstruction_demo(const ExperimentConfig& cfg) {
  validate(cfg);
  detail::require_id(cfg, {ExperimentId::kEx5}, "run_reconstruction_demo");
  const int M = cfg.M;
  const int M_A = cfg.ma_values.front();
  const HermiteBasis basis = build_basis(M);
  const SparseSignalSpec spec = cfg.signal();
  const SampleVector signal = synthesize(spec, basis);
  std::vector<int> truth = spec.orders();
  std::sort(truth.begin(), truth.end());
  const std::uint64_t stream = stream_seed(cfg.seed, 0);

  ReconstructionDemoResult out;
  out.trials.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(out.trials.size(), [&](std::size_t t) {
    ReconstructionTrial& r = out.trials[t];
    r.seed = trial_seed(stream, t);
    const Measurement meas = measure(signal, random_mask(M, M_A, r.seed));
    const ReconstructionResult rec = reconstruct(meas, basis, cfg.pnn);
    r.status = rec.status;
    r.support = rec.support;
    r.support_exact_match = rec.status == ReconstructionStatus::kOk && rec.support == truth;
    r.signal_mse = (rec.reconstructed_signal.values() - signal.values()).squaredNorm() / M;
  });

  std::vector<double> good;
  for (const auto& r : out.trials) {
    if (r.support_exact_match) {
      good.push_back(r.signal_mse);
      out.max_success_mse = std::max(out.max_success_mse, r.signal_mse);
    }
  }
  out.successes = static_cast<int>(good.size());
  out.success_fraction = static_cast<double>(out.successes) / cfg.trials;
  out.median_success_mse = detail::median(good);

  CsvWriter w(detail::out_file(cfg, "ex5_reconstruction.csv"), detail::metadata(cfg),
              {"seed", "support_exact_match", "signal_mse", "status"});
  for (const auto& r : out.trials) w.row(r.seed, r.support_exact_match, r.signal_mse, to_string(r.status));
  w.comment("summary success_fraction=" + format_number(out.success_fraction) +
            " median_success_mse=" + format_number(out.median_success_mse));
  out.files.push_back(w.path());

  if (cfg.svg && !out.trials.empty()) {
    const Measurement meas = measure(signal, random_mask(M, M_A, out.trials.front().seed));
    const ReconstructionResult rec = reconstruct(meas, basis, cfg.pnn);
    Series orig{"original", {}, {}}, recon{"reconstructed", {}, {}, true};
    for (int m = 0; m < M; ++m) {
      orig.x.push_back(basis.roots()(m));
      orig.y.push_back(signal[m]);
      recon.x.push_back(basis.roots()(m));
      recon.y.push_back(rec.reconstructed_signal[m]);
    }
    write_svg_chart(detail::out_file(cfg, "ex5_reconstruction.svg"), "reconstruction, first trial", "t", "f(t)",
                    {orig, recon});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coefficient magnitude distributions

struct HistogramClass {
  std::string variant;
  std::string label;      // "signal_p<order>" or "non_signal"
  int order = -1;         // -1 for the pooled non-signal class
  std::vector<double> bin_centers;
  std::vector<double> empirical_density;
  std::vector<double> theoretical_density;
  double ks = 0.0;
  double mean_abs = 0.0;     // mean of |c_p|
  double signed_mean = 0.0;  // mean of c_p
  double signed_sd = 0.0;
  std::size_t samples = 0;
};

struct HistogramResult {
  std::vector<HistogramClass> classes;
  std::vector<std::filesystem::path> files;
};

inline constexpr int kHistogramBins = 100;

namespace detail {

template <class Pdf, class Cdf>
HistogramClass summarise_class(std::string variant, std::string label, int order, std::vector<double> samples,
                               Pdf&& pdf, Cdf&& cdf) {
  HistogramClass h;
  h.variant = std::move(variant);
  h.label = std::move(label);
  h.order = order;
  h.samples = samples.size();
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  h.signed_mean = sum / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - h.signed_mean) * (x - h.signed_mean);
  h.signed_sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  for (double& x : samples) x = std::abs(x);
  std::sort(samples.begin(), samples.end());
  sum = 0.0;
  for (double x : samples) sum += x;
  h.mean_abs = sum / n;
  h.ks = ks_statistic_sorted(samples, cdf);
  const double top = samples.empty() || samples.back() <= 0.0 ? 1.0 : samples.back();
  const double width = top / kHistogramBins;
  std::vector<double> counts(kHistogramBins, 0.0);
  for (double x : samples) counts[static_cast<std::size_t>(std::min(kHistogramBins - 1, static_cast<int>(x / width)))] += 1.0;
  for (int k = 0; k < kHistogramBins; ++k) {
    const double centre = (k + 0.5) * width;
    h.bin_centers.push_back(centre);
    h.empirical_density.push_back(counts[static_cast<std::size_t>(k)] / (n * width));
    h.theoretical_density.push_back(pdf(centre));
  }
  return h;
}

}  // namespace detail

/// Samples c_p at the signal positions (one class per component) and pooled
/// over all non-signal positions, against folded/half-normal densities from
/// the model statistics.
inline HistogramResult run_histograms(const ExperimentConfig& cfg) {
  validate(cfg);
  detail::require_id(cfg, {ExperimentId::kHistograms}, "run_histograms");
  const int M = cfg.M;
  const int T = cfg.trials;
  const int M_A = cfg.ma_values.front();
  const HermiteBasis basis = build_basis(M);
  const std::string meta = detail::metadata(cfg);

  HistogramResult out;
  for (std::size_t v = 0; v < cfg.settings.size(); ++v) {
    const SignalSetting& setting = cfg.settings[v];
    const SparseSignalSpec spec(M, setting.components);
    const int K = spec.sparsity();
    const std::vector<int> orders = spec.orders();
    std::vector<int> noise_positions;
    for (int p = 0; p < M; ++p) {
      if (std::find(orders.begin(), orders.end(), p) == orders.end()) noise_positions.push_back(p);
    }
    const auto NK = noise_positions.size();
    const Eigen::MatrixXd G = detail::coefficient_operator(basis, synthesize(spec, basis).values());
    const std::uint64_t stream = stream_seed(cfg.seed, v);

    std::vector<std::vector<double>> signal_samples(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(T)));
    std::vector<double> noise_samples(static_cast<std::size_t>(T) * NK);
    parallel_for(static_cast<std::size_t>(detail::batch_count(T)), [&](std::size_t b) {
      const int first = static_cast<int>(b) * kTrialBatch;
      Eigen::MatrixXd z(M, detail::batch_size(T, static_cast<int>(b)));
      detail::fill_mask_batch(z, M, M_A, stream, first);
      const Eigen::MatrixXd c = G * z;
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        const auto t = static_cast<std::size_t>(first + j);
        for (int i = 0; i < K; ++i) signal_samples[static_cast<std::size_t>(i)][t] = c(orders[static_cast<std::size_t>(i)], j);
        for (std::size_t k = 0; k < NK; ++k) noise_samples[t * NK + k] = c(noise_positions[k], j);
      }
    });

    const ComponentStatistics stats = multi_component_stats(spec, basis, M_A);
    for (int i = 0; i < K; ++i) {
      const auto& cm = stats.components[static_cast<std::size_t>(i)];
      const double mu = cm.mean;
      const double sd = std::sqrt(cm.variance);
      out.classes.push_back(detail::summarise_class(
          setting.name, "signal_p" + std::to_string(cm.order), cm.order,
          std::move(signal_samples[static_cast<std::size_t>(i)]),
          [&](double x) { return folded_normal_pdf(x, mu, sd); }, [&](double x) { return folded_normal_cdf(x, mu, sd); }));
    }
    const double sn = stats.noise_sigma();
    out.classes.push_back(detail::summarise_class(
        setting.name, "non_signal", -1, std::move(noise_samples), [&](double x) { return half_normal_pdf(x, sn); },
        [&](double x) { return half_normal_cdf(x, sn); }));

    CsvWriter w(detail::out_file(cfg, "histograms_" + setting.name + ".csv"), meta,
                {"class", "bin_center", "empirical_density", "theoretical_density"});
    for (const auto& h : out.classes) {
      if (h.variant != setting.name) continue;
      for (int k = 0; k < kHistogramBins; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        w.row(h.label, h.bin_centers[kk], h.empirical_density[kk], h.theoretical_density[kk]);
      }
      if (cfg.svg) {
        Series bars{"empirical", h.bin_centers, h.empirical_density, false, true};
        Series pdf{"model pdf", h.bin_centers, h.theoretical_density};
        write_svg_chart(detail::out_file(cfg, "histograms_" + setting.name + "_" + h.label + ".svg"),
                        setting.name + " " + h.label, "|c_p|", "density", {bars, pdf});
      }
    }
    out.files.push_back(w.path());
  }

  CsvWriter w(detail::out_file(cfg, "histograms_ks.csv"), meta, {"variant", "class", "order", "ks_statistic"});
  for (const auto& h : out.classes) w.row(h.variant, h.label, h.order, h.ks);
  out.files.push_back(w.path());
  return out;
}

/// Runs the campaign named by cfg.id; returns the files written.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.id) {
    case ExperimentId::kEx1a:
    case ExperimentId::kEx1b:
    case ExperimentId::kEx2:
      return run_variance_sweep(cfg).files;
    case ExperimentId::kEx3:
      return run_misdetection_sweep(cfg).files;
    case ExperimentId::kEx4:
      return run_threshold_demo(cfg).files;
    case ExperimentId::kEx5:
      return run_reconstruction_demo(cfg).files;
    case ExperimentId::kHistograms:
      return run_histograms(cfg).files;
  }
  throw InvalidArgument("unknown experiment");
}

}  // namespace hermcs::harness
