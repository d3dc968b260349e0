#include <kamnf/pipelines.hpp>

#include <boost/multiprecision/cpp_complex.hpp>

#include <kamnf/bruno.hpp>
#include <kamnf/density.hpp>
#include <kamnf/dynamics.hpp>
#include <kamnf/frequency.hpp>
#include <kamnf/normalform.hpp>
#include <kamnf/parametric.hpp>

namespace kamnf {

namespace {

using CQ = boost::multiprecision::cpp_complex_quad;

template <class CTo, class CFrom>
Series<CTo> convert_series(const Series<CFrom> &s) {
  using RTo = typename scalar_traits<CTo>::real_t;
  Series<CTo> out(s.dim(), s.maxDegree(), s.maxTDegree());
  for (const auto &[e, c] : s.terms())
    out.addTerm(e, CTo(RTo(c.real()), RTo(c.imag())));
  return out;
}

std::vector<double> alpha_to_double(const std::vector<std::string> &alpha) {
  std::vector<double> out;
  for (const auto &s : alpha) out.push_back(std::stod(s));
  return out;
}

std::string witness_string(const std::vector<int> &w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i)
    s += (i ? "," : "") + std::to_string(w[i]);
  return s + ")";
}

nlohmann::json nf_result_to_json(const NormalFormResult<std::complex<double>> &r) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto &g : r.generators) gens.push_back(series_to_json(g));
  return {{"P", series_to_json(r.P)},
          {"generators", gens},
          {"achieved_order", r.achieved_order},
          {"min_divisor", r.min_divisor_overall},
          {"residual_norm", r.residual_norm}};
}

nlohmann::json freq_result_to_json(const FrequencyMapResult &f) {
  nlohmann::json ghat = nlohmann::json::array();
  for (const auto &g : f.ghat) ghat.push_back(series_to_json(g));
  nlohmann::json basis = nlohmann::json::array();
  for (int c = 0; c < f.space_basis.cols(); ++c) {
    nlohmann::json col = nlohmann::json::array();
    for (int r = 0; r < f.space_basis.rows(); ++r)
      col.push_back({f.space_basis(r, c).real(), f.space_basis(r, c).imag()});
    basis.push_back(col);
  }
  return {{"ghat", ghat}, {"basis", basis}, {"dim", f.space_dim}};
}

struct NfOutput {
  NormalFormResult<std::complex<double>> nf;
  std::vector<SeriesD> ghat;
};

// normal form + frequency map at the configured precision, reported at
// double precision
NfOutput compute_nf(const JobConfig &cfg) {
  SeriesD H = parse_series(cfg.hamiltonian, cfg.n, cfg.N, cfg.N_t);
  NfOutput out;
  if (cfg.precision_bits <= 53) {
    FrequencyVectorD alpha;
    for (const auto &s : cfg.alpha) alpha.alpha.emplace_back(std::stod(s));
    double thr = cfg.divisor_threshold > 0 ? cfg.divisor_threshold : 1e-12;
    auto [nf, ghat] = parametric_normal_form(H, alpha, cfg.k, thr);
    out.nf = std::move(nf);
    out.ghat = std::move(ghat);
  } else {
    using RQ = CQ::value_type;
    FrequencyVector<CQ> alpha;
    for (const auto &s : cfg.alpha) alpha.alpha.emplace_back(RQ(s), RQ(0));
    RQ thr = cfg.divisor_threshold > 0 ? RQ(cfg.divisor_threshold) : RQ(1e-25);
    auto Hq = convert_series<CQ>(H);
    auto [nfq, ghatq] = parametric_normal_form(Hq, alpha, cfg.k, thr);
    out.nf.P = convert_series<std::complex<double>>(nfq.P);
    for (const auto &g : nfq.generators)
      out.nf.generators.push_back(convert_series<std::complex<double>>(g));
    out.nf.achieved_order = nfq.achieved_order;
    out.nf.min_divisor_overall = static_cast<double>(nfq.min_divisor_overall);
    out.nf.residual_norm = static_cast<double>(nfq.residual_norm);
    for (const auto &g : ghatq)
      out.ghat.push_back(convert_series<std::complex<double>>(g));
  }
  return out;
}

std::string ghat_string(const std::vector<SeriesD> &ghat) {
  std::string s = "(";
  for (std::size_t i = 0; i < ghat.size(); ++i)
    s += (i ? ", " : "") + print_series(ghat[i]);
  return s + ")";
}

PipelineOutcome run_nf(const JobConfig &cfg, bool freq_only) {
  PipelineOutcome out;
  NfOutput r = compute_nf(cfg);
  FrequencyMapResult fs = frequency_space(r.ghat);
  std::ostringstream os;
  os << "normal form to order " << r.nf.achieved_order << "\n"
     << "P = " << print_series(r.nf.P) << "\n"
     << "ghat = " << ghat_string(r.ghat) << "\n"
     << "F(H) dim = " << fs.space_dim << "\n"
     << "min divisor = " << r.nf.min_divisor_overall << "\n"
     << "residual norm = " << r.nf.residual_norm << "\n";
  out.summary = os.str();
  if (freq_only) {
    out.files["freq.json"] = freq_result_to_json(fs).dump(2) + "\n";
    out.files["freq.txt"] = out.summary;
  } else {
    nlohmann::json j = nf_result_to_json(r.nf);
    j["ghat"] = freq_result_to_json(fs)["ghat"];
    j["frequency_space_dim"] = fs.space_dim;
    out.files["nf.json"] = j.dump(2) + "\n";
    out.files["nf.txt"] = out.summary;
  }
  return out;
}

PipelineOutcome run_bruno(const JobConfig &cfg) {
  PipelineOutcome out;
  BrunoProfile prof = bruno_sequence(alpha_to_double(cfg.alpha), cfg.K);
  BrunoSum sum = bruno_sum(prof);
  nlohmann::json j = {{"alpha", prof.alpha},
                      {"levels", prof.levels},
                      {"a", prof.a},
                      {"witnesses", prof.witnesses},
                      {"partial_sums", prof.partial_sums},
                      {"resonant", prof.resonant},
                      {"tail_gap", sum.tail_gap},
                      {"verdict", sum.verdict}};
  std::ostringstream os;
  os << "Bruno sequence, heuristic at level K = " << cfg.K << "\n";
  for (int k = 0; k <= cfg.K; ++k)
    os << "a_" << k << " = " << prof.a[k]
       << "  witness " << witness_string(prof.witnesses[k])
       << "  partial sum " << prof.partial_sums[k] << "\n";
  os << "tail_gap = " << sum.tail_gap << "\n" << sum.verdict << "\n";
  out.summary = os.str();
  out.files["bruno.json"] = j.dump(2) + "\n";
  out.files["bruno.txt"] = out.summary;
  if (prof.resonant) {
    out.exit_code = kExitMath;
    out.summary += "resonance: witness " +
                   witness_string(prof.witnesses[prof.resonant_level]) + "\n";
    out.files["bruno.txt"] = out.summary;
  }
  return out;
}

PipelineOutcome run_density(const JobConfig &cfg) {
  PipelineOutcome out;
  NfOutput r = compute_nf(cfg);
  DensityReport rep = density_estimate(
      r.ghat, alpha_to_double(cfg.alpha), cfg.tau, cfg.K, cfg.radii,
      cfg.samples, cfg.seed,
      cfg.density_mode == "grid" ? SamplingMode::Grid
                                 : SamplingMode::MonteCarlo);
  nlohmann::json j = {{"radii", rep.radii},
                      {"fractions", rep.fractions},
                      {"ci_half_widths", rep.ci_half_widths},
                      {"samples_per_radius", rep.samples_per_radius},
                      {"K", rep.K},
                      {"tau", rep.tau},
                      {"sigma_note", rep.sigma_note}};
  std::string csv = "radius,fraction,ci_half_width\n";
  std::ostringstream os;
  os << "density of g^{-1}(C(a)) -- " << rep.sigma_note << "\n";
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", rep.radii[i],
                  rep.fractions[i], rep.ci_half_widths[i]);
    csv += line;
    os << "r = " << rep.radii[i] << ": fraction " << rep.fractions[i]
       << " +- " << rep.ci_half_widths[i] << "\n";
  }
  out.summary = os.str();
  out.files["density.json"] = j.dump(2) + "\n";
  out.files["density.csv"] = csv;
  out.files["density.txt"] = out.summary;
  return out;
}

PipelineOutcome run_verify(const JobConfig &cfg) {
  PipelineOutcome out;
  SeriesD H = parse_series(cfg.hamiltonian, cfg.n, cfg.N, cfg.N_t);
  FrequencyVectorD alpha;
  for (const auto &s : cfg.alpha) alpha.alpha.emplace_back(std::stod(s));
  std::vector<double> lambda0 = cfg.lambda0;
  if (lambda0.empty()) lambda0.assign(cfg.n, 1.0);
  double thr = cfg.divisor_threshold > 0 ? cfg.divisor_threshold : 1e-12;
  DriftReport rep = drift_exponent(
      H, alpha, cfg.k, lambda0, cfg.radii, cfg.T, cfg.dt,
      cfg.method == "midpoint" ? IntegratorMethod::Midpoint
                               : IntegratorMethod::Gauss2,
      thr);
  nlohmann::json j = {{"radii", rep.radii},
                      {"deviations", rep.deviations},
                      {"exponent", rep.fitted_exponent},
                      {"r2_of_fit", rep.r2_of_fit},
                      {"all_floor", rep.all_floor},
                      {"floor_tol", rep.floor_tol}};
  std::ostringstream os;
  os << "action drift vs radius\n";
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    os << "r = " << rep.radii[i] << ": max deviation " << rep.deviations[i]
       << (rep.at_floor[i] ? " (integrator floor)" : "") << "\n";
  if (rep.all_floor)
    os << "all deviations at integrator floor; exponent fit skipped\n";
  else
    os << "fitted exponent = " << rep.fitted_exponent
       << " (R^2 = " << rep.r2_of_fit << ")\n";
  out.summary = os.str();
  out.files["verify.json"] = j.dump(2) + "\n";
  out.files["verify.txt"] = out.summary;
  return out;
}

}  // namespace

JobConfig JobConfig::from_json(const nlohmann::json &j) {
  JobConfig c;
  c.overlay(j);
  return c;
}

void JobConfig::overlay(const nlohmann::json &j) {
  auto get = [&](const char *key, auto &field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("n", n);
  get("alpha", alpha);
  get("hamiltonian", hamiltonian);
  get("N", N);
  get("N_t", N_t);
  get("k", k);
  get("precision_bits", precision_bits);
  get("divisor_threshold", divisor_threshold);
  get("tau", tau);
  get("K", K);
  get("radii", radii);
  get("samples", samples);
  get("seed", seed);
  get("T", T);
  get("dt", dt);
  get("method", method);
  get("lambda0", lambda0);
  get("density_mode", density_mode);
}

void JobConfig::validate(const std::string &command) const {
  auto fail = [](const std::string &msg) {
    throw std::invalid_argument(msg);
  };
  if (n < 1) fail("config field 'n' must be >= 1");
  if (static_cast<int>(alpha.size()) != n)
    fail("config field 'alpha' must have n entries");
  for (const auto &s : alpha) {
    try {
      (void)std::stod(s);
    } catch (...) {
      fail("config field 'alpha' entry is not a decimal string: " + s);
    }
  }
  if (N < 2) fail("config field 'N' must be >= 2");
  if (precision_bits < 53) fail("config field 'precision_bits' must be >= 53");
  if (command == "nf" || command == "freq" || command == "density" ||
      command == "verify") {
    if (hamiltonian.empty()) fail("config field 'hamiltonian' is required");
    if (k < 3) fail("config field 'k' must be >= 3");
    if (k > N) fail("config field 'k' must not exceed 'N'");
  }
  if (command == "bruno" || command == "density") {
    if (K < 0) fail("config field 'K' must be >= 0");
  }
  if (command == "density") {
    if (samples < 1) fail("config field 'samples' must be >= 1");
    if (radii.empty()) fail("config field 'radii' must be nonempty");
    if (density_mode != "mc" && density_mode != "grid")
      fail("config field 'density_mode' must be 'mc' or 'grid'");
  }
  if (command == "verify") {
    if (!(dt > 0) || dt > T) fail("config fields need 0 < 'dt' <= 'T'");
    if (method != "midpoint" && method != "gauss2")
      fail("config field 'method' must be 'midpoint' or 'gauss2'");
    if (radii.empty()) fail("config field 'radii' must be nonempty");
    if (precision_bits != 53)
      fail("config field 'precision_bits': verify runs at 53 bits");
  }
  if ((command == "bruno" || command == "density") && precision_bits != 53)
    fail("config field 'precision_bits': " + command + " runs at 53 bits");
}

PipelineOutcome run_pipeline(const std::string &command, const JobConfig &cfg) {
  PipelineOutcome out;
  try {
    cfg.validate(command);
    if (command == "nf") return run_nf(cfg, false);
    if (command == "freq") return run_nf(cfg, true);
    if (command == "bruno") return run_bruno(cfg);
    if (command == "density") return run_density(cfg);
    if (command == "verify") return run_verify(cfg);
    out.exit_code = kExitUsage;
    out.summary = "unknown command: " + command + "\n";
  } catch (const SmallDivisorError &e) {
    out.exit_code = kExitMath;
    out.summary = std::string("mathematical abort: ") + e.what() +
                  "\nwitness j = " + witness_string(e.witness()) + "\n";
  } catch (const TExpansionOverflow &e) {
    out.exit_code = kExitMath;
    out.summary = std::string("mathematical abort: ") + e.what() + "\n";
  } catch (const std::exception &e) {
    out.exit_code = kExitUsage;
    out.summary = std::string("error: ") + e.what() + "\n";
  }
  return out;
}

}  // namespace kamnf
