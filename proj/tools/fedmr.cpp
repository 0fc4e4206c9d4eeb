// fedmr: IV sweeps, depletion profiles, resonance spectra, contrast studies,
// and barrier calibration for the graphitic-contact NV photodetector model.
// Every result lands as a versioned CSV plus a JSON sidecar carrying the run
// manifest; `verify` re-derives the hashes and flags any drift.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fedmr/carriers.hpp"
#include "fedmr/csvio.hpp"
#include "fedmr/electrostatics.hpp"
#include "fedmr/experiments.hpp"
#include "fedmr/manifest.hpp"
#include "fedmr/photophysics.hpp"
#include "fedmr/transport.hpp"

namespace {

using namespace fedmr;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<double> parse_range(const std::string& spec) {
  double a = 0, b = 0, step = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
      !(step > 0) || b < a)
    throw ConfigError("range must be start:stop:step with step > 0, got '" +
                      spec + "'");
  std::vector<double> v;
  for (double x = a; x <= b + 1e-9 * step; x += step) v.push_back(x);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> v;
  for (const std::string& cell : split(spec, ',')) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
      throw ConfigError("bad number '" + cell + "' in list '" + spec + "'");
    v.push_back(x);
  }
  return v;
}

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out = "out";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path,
                  "INI config file (built-in defaults when omitted)");
  sub->add_option("--set", c.sets, "override as section.key=value (repeatable)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
}

Config load_common(const Common& c) {
  return c.config_path.empty() ? load_config("", c.sets)
                               : load_config_file(c.config_path, c.sets);
}

// Single writer for a run's outputs: files accumulate here and the sidecar
// closes the set.
struct Emitter {
  std::string dir;
  FileHashes files;
  explicit Emitter(const std::string& d) : dir(d) {
    std::filesystem::create_directories(d);
  }
  void write(const std::string& name, const std::string& text) {
    write_text_file(dir + "/" + name, text);
    files.emplace_back(name, fnv1a_hex(text));
    std::printf("wrote %s/%s\n", dir.c_str(), name.c_str());
  }
  void finish(RunManifest m, const std::string& name, double wall_s) {
    m.wall_clock_s = wall_s;
    write_text_file(dir + "/" + name, sidecar_json(m, files));
    std::printf("wrote %s/%s\n", dir.c_str(), name.c_str());
  }
};

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
  int n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = f.n * sxx - sx * sx;
  if (det == 0) throw PreconditionError("line fit: degenerate abscissa");
  f.slope = (f.n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / f.n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / f.n;
  for (int i = 0; i < f.n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::rising: return "rising";
    case Regime::fast_rise: return "fast_rise";
    default: return "plateau";
  }
}

const std::vector<std::string> kIvHeader = {
    "u_V",          "current_A",   "e_center_V_per_m", "e_edge_V_per_m",
    "w_vertical_m", "l_lateral_m", "stage"};

void iv_rows(CsvTable& t, const IVCurve& curve) {
  for (const IVPoint& p : curve.points)
    t.row({csv_num(p.u), csv_num(p.current), csv_num(p.e_center),
           csv_num(p.e_edge), csv_num(p.w_vertical), csv_num(p.l_lateral),
           std::to_string(p.stage)});
}

int cmd_iv(const Common& com, Config cfg, const std::string& u_range) {
  validate(cfg);
  const std::vector<double> sweep = parse_range(u_range);
  const double t0 = now_s();
  const double scale = calibrate_generation(cfg);
  const RunManifest man = make_manifest(cfg, scale, 1);
  const IVCurve curve = device_iv(sweep, cfg, scale);
  CsvTable t(manifest_hash(man), kIvHeader);
  iv_rows(t, curve);
  Emitter em(com.out);
  em.write("iv.csv", t.text());
  em.finish(man, "iv.json", now_s() - t0);
  std::printf("p0 = %s m^-3, %zu biases\n", csv_num(curve.p0).c_str(),
              sweep.size());
  return 0;
}

int cmd_dr(const Common& com, Config cfg, const std::string& u_list,
           const std::string& filter_s) {
  validate(cfg);
  const std::vector<double> us = parse_list(u_list);
  if (us.empty()) throw ConfigError("dr: empty u-list");
  for (double u : us)
    if (!(u >= 0)) throw ConfigError("dr: biases must be >= 0");
  const PlFilter filter =
      filter_s == "nvzero" ? PlFilter::nv_zero : PlFilter::nv_minus;

  const double t0 = now_s();
  const double scale = calibrate_generation(cfg);
  const SpinChargeState nv =
      nv_state(cfg.rates, cfg.drive, cfg.geometry.beam_waist);
  const CarrierState carriers = steady_carriers(
      cfg.material.nv_density() * nv.pair_rate * scale, cfg.material);
  const Grid2D grid = make_grid(cfg.geometry);
  const std::vector<double> p_col(grid.nx, carriers.p);
  const Electrode pos = cfg.drive.positive_electrode;

  auto solve_at = [&](double u) {
    try {
      return solve_poisson(cfg.geometry, cfg.material, cfg.solver, p_col, u,
                           pos);
    } catch (const ConvergenceError& e) {
      char tag[40];
      std::snprintf(tag, sizeof tag, "bias %.6g V: ", u);
      throw ConvergenceError(tag + std::string(e.what()));
    }
  };

  const FieldSolution off = solve_at(0.0);
  const RunManifest man = make_manifest(cfg, scale, static_cast<int>(us.size()));
  const std::string mh = manifest_hash(man);
  Emitter em(com.out);
  CsvTable mt(mh, {"u_V", "w_vertical_m", "l_lateral_m", "e_center_V_per_m",
                   "e_edge_V_per_m", "stage"});
  std::vector<double> su, sl;
  for (double u : us) {
    const FieldSolution on = solve_at(u);
    const DepletionMetrics m =
        extract_metrics(on, cfg.geometry, cfg.material, cfg.solver, p_col);
    const PlProfile prof =
        delta_pl_profile(on, off, cfg.geometry, filter, cfg.rates.nv0_pl_alpha);
    CsvTable pt(mh, {"x_m", "dpl_norm"});
    for (std::size_t j = 0; j < prof.x.size(); ++j)
      pt.num_row({prof.x[j], prof.dpl[j]});
    char name[48];
    std::snprintf(name, sizeof name, "dr_profile_u%gV.csv", u);
    em.write(name, pt.text());
    mt.row({csv_num(u), csv_num(m.w_vertical), csv_num(m.l_lateral),
            csv_num(m.e_center), csv_num(m.e_edge), std::to_string(m.stage)});
    if (m.stage == 3) {
      su.push_back(std::sqrt(u));
      sl.push_back(m.l_lateral);
    }
  }
  em.write("dr_metrics.csv", mt.text());
  if (su.size() >= 3) {
    const LineFit f = fit_line(su, sl);
    std::printf(
        "stage-3 lateral reach: L = %.6g*sqrt(U) %+.6g m over %d rows, "
        "R^2 = %.6f\n",
        f.slope, f.intercept, f.n, f.r2);
  } else {
    std::printf("stage-3 lateral fit skipped (%zu stage-3 rows)\n", su.size());
  }
  em.finish(man, "dr.json", now_s() - t0);
  return 0;
}

int cmd_spectrum(const Common& com, Config cfg, const std::string& f_range,
                 double bias) {
  if (cfg.drive.b_axial == 0 && cfg.drive.b_gradient == 0)
    gradient_for_resonances(1.98e9, 2.02e9, cfg.geometry, cfg.drive.b_axial,
                            cfg.drive.b_gradient);
  validate(cfg);
  std::vector<double> freqs = parse_range(f_range);
  for (double& f : freqs) f *= 1e9;

  const double t0 = now_s();
  const double scale = calibrate_generation(cfg);
  const RunManifest man = make_manifest(cfg, scale, 1);
  const SpectrumResult r = spectrum_scan(freqs, bias, cfg, scale);
  CsvTable t(manifest_hash(man),
             {"f_Hz", "c_pdmr", "c_odmr_a", "c_odmr_b", "i_on_A", "i_off_A"});
  for (std::size_t k = 0; k < freqs.size(); ++k)
    t.num_row({r.frequencies[k], r.pdmr[k], r.odmr_a[k], r.odmr_b[k],
               r.i_on[k], r.i_off});
  Emitter em(com.out);
  em.write("spectrum.csv", t.text());
  em.finish(man, "spectrum.json", now_s() - t0);

  std::size_t best = 0;
  for (std::size_t k = 1; k < freqs.size(); ++k)
    if (r.pdmr[k] > r.pdmr[best]) best = k;
  std::printf("pdmr peak at %.6g GHz, contrast %.4g (bias %g V, electrode %s positive)\n",
              r.frequencies[best] * 1e-9, r.pdmr[best], bias,
              r.positive == Electrode::A ? "A" : "B");
  return 0;
}

int cmd_contrast(const Common& com, Config cfg, const std::string& u_range) {
  validate(cfg);
  const double t0 = now_s();
  const double scale = calibrate_generation(cfg);
  const RunManifest man = make_manifest(cfg, scale, 2);
  const ContrastSweep s =
      contrast_vs_voltage(parse_range(u_range), cfg, scale);
  CsvTable t(manifest_hash(man),
             {"u_V", "c_pdmr", "i_off_A", "i_on_A", "regime"});
  for (std::size_t k = 0; k < s.voltages.size(); ++k)
    t.row({csv_num(s.voltages[k]), csv_num(s.c_pdmr[k]), csv_num(s.i_off[k]),
           csv_num(s.i_on[k]), regime_name(s.regime[k])});
  Emitter em(com.out);
  em.write("contrast.csv", t.text());
  em.finish(man, "contrast.json", now_s() - t0);
  std::printf("rf-on knee %.4g V, rf-off knee %.4g V\n", s.knee_on,
              s.knee_off);
  return 0;
}

int cmd_beamstudy(const Common& com, Config cfg, const std::string& pairs,
                  const std::string& u_range) {
  validate(cfg);
  std::vector<std::array<double, 2>> wp;
  for (const std::string& pair : split(pairs, ',')) {
    double w_um = 0, p_mw = 0;
    if (std::sscanf(pair.c_str(), "%lf:%lf", &w_um, &p_mw) != 2)
      throw ConfigError("beamstudy: pairs must be waist_um:power_mW, got '" +
                        pair + "'");
    wp.push_back({w_um * 1e-6, p_mw * 1e-3});
  }
  const double t0 = now_s();
  const double scale = calibrate_generation(cfg);
  const RunManifest man =
      make_manifest(cfg, scale, 2 * static_cast<int>(wp.size()));
  const std::string mh = manifest_hash(man);
  const std::vector<BeamCase> cases =
      beam_size_study(wp, parse_range(u_range), cfg, scale);

  Emitter em(com.out);
  CsvTable summary(mh, {"waist_m", "power_W", "knee_on_V", "knee_off_V",
                        "plateau_contrast"});
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const BeamCase& c = cases[i];
    summary.num_row({c.waist, c.power, c.sweep.knee_on, c.sweep.knee_off,
                     c.plateau_contrast});
    CsvTable t(mh, {"u_V", "c_pdmr", "regime"});
    for (std::size_t k = 0; k < c.sweep.voltages.size(); ++k)
      t.row({csv_num(c.sweep.voltages[k]), csv_num(c.sweep.c_pdmr[k]),
             regime_name(c.sweep.regime[k])});
    char name[40];
    std::snprintf(name, sizeof name, "beamstudy_case%zu.csv", i);
    em.write(name, t.text());
    std::printf("waist %g um, power %g mW: knee_off %.4g V, plateau contrast %.4g\n",
                c.waist * 1e6, c.power * 1e3, c.sweep.knee_off,
                c.plateau_contrast);
  }
  em.write("beamstudy.csv", summary.text());
  em.finish(man, "beamstudy.json", now_s() - t0);
  return 0;
}

int cmd_calibrate(const Common& com, Config cfg, const std::string& data_path,
                  const DiodePair& seed) {
  validate(cfg);
  const double t0 = now_s();
  const CsvData d = read_csv(read_text_file(data_path));
  const std::vector<double>& uc = d.column("u_V");
  const std::vector<double>& ic = d.column("current_A");
  std::vector<double> u, i;
  for (std::size_t k = 0; k < uc.size(); ++k)
    if (uc[k] > 0 && ic[k] > 0 && std::isfinite(uc[k]) && std::isfinite(ic[k])) {
      u.push_back(uc[k]);
      i.push_back(ic[k]);
    }
  const BarrierFit fit = calibrate_barrier(u, i, seed, cfg.material);

  const RunManifest man = make_manifest(cfg, 1.0, 1);
  CsvTable t(manifest_hash(man), {"phi1_V", "eta", "a_eff_m2",
                                  "rms_log_residual", "condition",
                                  "iterations"});
  t.num_row({fit.phi1, fit.eta, fit.a_eff, fit.rms_log_residual, fit.condition,
             static_cast<double>(fit.iterations)});
  Emitter em(com.out);
  em.write("calibrate.csv", t.text());
  em.finish(man, "calibrate.json", now_s() - t0);
  std::printf(
      "phi1 = %.8g V, eta = %.8g, a_eff = %.8g m^2 "
      "(%d iterations, rms log residual %.3g)\n",
      fit.phi1, fit.eta, fit.a_eff, fit.iterations, fit.rms_log_residual);
  return 0;
}

int cmd_figure_pack(const Common& com, const Config& base) {
  validate(base);
  const double t0 = now_s();
  const double scale = calibrate_generation(base);
  const RunManifest man = make_manifest(base, scale, 8);
  const std::string mh = manifest_hash(man);
  Emitter em(com.out);

  auto with_power = [&](double watts, bool rf_on) {
    Config c = base;
    c.drive.optical_power = watts;
    c.drive.rf_enabled = rf_on;
    return c;
  };

  // 2a: dark-to-bright IV family, RF off
  const std::vector<double> u_iv = parse_range("0:150:5");
  const std::vector<double> powers = {0.1, 0.2, 0.3, 0.4};
  std::vector<IVCurve> iv_off;
  for (double p : powers)
    iv_off.push_back(device_iv(u_iv, with_power(p, false), scale));
  CsvTable f2a(mh, {"u_V", "i_100mW_A", "i_200mW_A", "i_300mW_A", "i_400mW_A"});
  for (std::size_t k = 0; k < u_iv.size(); ++k)
    f2a.num_row({u_iv[k], iv_off[0].points[k].current,
                 iv_off[1].points[k].current, iv_off[2].points[k].current,
                 iv_off[3].points[k].current});
  em.write("fig2a.csv", f2a.text());

  // 2b/2d: depletion extension and contact field at 100 mW
  const IVCurve dr = device_iv(parse_range("10:240:10"),
                               with_power(0.1, false), scale);
  CsvTable f2b(mh, {"u_V", "l_lateral_m", "stage"});
  CsvTable f2d(mh, {"u_V", "e_center_V_per_m", "w_vertical_m"});
  std::vector<double> su, sl;
  for (const IVPoint& p : dr.points) {
    f2b.row({csv_num(p.u), csv_num(p.l_lateral), std::to_string(p.stage)});
    f2d.num_row({p.u, p.e_center, p.w_vertical});
    if (p.stage == 3) {
      su.push_back(std::sqrt(p.u));
      sl.push_back(p.l_lateral);
    }
  }
  em.write("fig2b.csv", f2b.text());
  if (su.size() >= 3) {
    const LineFit f = fit_line(su, sl);
    std::printf("fig2b sqrt-U fit: R^2 = %.6f over %d stage-3 rows\n", f.r2,
                f.n);
  }

  // 2c: normalized delta-PL profiles, one bias per depletion stage
  {
    const Config c = with_power(0.1, false);
    const SpinChargeState nv =
        nv_state(c.rates, c.drive, c.geometry.beam_waist);
    const CarrierState cs = steady_carriers(
        c.material.nv_density() * nv.pair_rate * scale, c.material);
    const Grid2D grid = make_grid(c.geometry);
    const std::vector<double> p_col(grid.nx, cs.p);
    const Electrode pos = c.drive.positive_electrode;
    const FieldSolution off =
        solve_poisson(c.geometry, c.material, c.solver, p_col, 0.0, pos);
    const std::vector<double> u_prof = {30, 60, 150};
    std::vector<PlProfile> profs;
    for (double u : u_prof)
      profs.push_back(delta_pl_profile(
          solve_poisson(c.geometry, c.material, c.solver, p_col, u, pos), off,
          c.geometry, PlFilter::nv_minus, c.rates.nv0_pl_alpha));
    CsvTable f2c(mh, {"x_m", "dpl_u30V", "dpl_u60V", "dpl_u150V"});
    for (std::size_t j = 0; j < profs[0].x.size(); ++j)
      f2c.num_row({profs[0].x[j], profs[0].dpl[j], profs[1].dpl[j],
                   profs[2].dpl[j]});
    em.write("fig2c.csv", f2c.text());
  }
  em.write("fig2d.csv", f2d.text());

  // 3a: RF on/off IV at 400 mW
  const IVCurve on400 = device_iv(u_iv, with_power(0.4, true), scale);
  CsvTable f3a(mh, {"u_V", "i_off_A", "i_on_A"});
  for (std::size_t k = 0; k < u_iv.size(); ++k)
    f3a.num_row({u_iv[k], iv_off[3].points[k].current,
                 on400.points[k].current});
  em.write("fig3a.csv", f3a.text());

  // 3b: spectra for both polarities at 150 V
  {
    Config c = with_power(0.4, true);
    if (c.drive.b_axial == 0 && c.drive.b_gradient == 0)
      gradient_for_resonances(1.98e9, 2.02e9, c.geometry, c.drive.b_axial,
                              c.drive.b_gradient);
    std::vector<double> freqs = parse_range("1.85:2.15:0.01");
    for (double& f : freqs) f *= 1e9;
    c.drive.positive_electrode = Electrode::A;
    const SpectrumResult ra = spectrum_scan(freqs, 150.0, c, scale);
    c.drive.positive_electrode = Electrode::B;
    const SpectrumResult rb = spectrum_scan(freqs, 150.0, c, scale);
    CsvTable f3b(mh, {"f_Hz", "c_pdmr_pos_a", "c_pdmr_pos_b", "c_odmr_a",
                      "c_odmr_b"});
    for (std::size_t k = 0; k < freqs.size(); ++k)
      f3b.num_row({ra.frequencies[k], ra.pdmr[k], rb.pdmr[k], ra.odmr_a[k],
                   ra.odmr_b[k]});
    em.write("fig3b.csv", f3b.text());
  }

  // 3c: contrast regimes at 400 mW
  {
    const ContrastSweep s = contrast_vs_voltage(parse_range("10:150:5"),
                                                with_power(0.4, true), scale);
    CsvTable f3c(mh, {"u_V", "c_pdmr", "regime"});
    for (std::size_t k = 0; k < s.voltages.size(); ++k)
      f3c.row({csv_num(s.voltages[k]), csv_num(s.c_pdmr[k]),
               regime_name(s.regime[k])});
    em.write("fig3c.csv", f3c.text());
    std::printf("fig3c knees: rf-on %.4g V, rf-off %.4g V\n", s.knee_on,
                s.knee_off);
  }

  // 3d: beam-size study at constant intensity
  {
    const std::vector<BeamCase> cases =
        beam_size_study({{5e-6, 0.1}, {10e-6, 0.4}}, parse_range("10:320:10"),
                        with_power(0.1, true), scale);
    CsvTable f3d(mh, {"u_V", "c_pdmr_w5um_100mW", "c_pdmr_w10um_400mW"});
    for (std::size_t k = 0; k < cases[0].sweep.voltages.size(); ++k)
      f3d.num_row({cases[0].sweep.voltages[k], cases[0].sweep.c_pdmr[k],
                   cases[1].sweep.c_pdmr[k]});
    em.write("fig3d.csv", f3d.text());
    std::printf("fig3d knees: %.4g V (5 um) -> %.4g V (10 um)\n",
                cases[0].sweep.knee_off, cases[1].sweep.knee_off);
  }

  em.finish(man, "figures.json", now_s() - t0);
  return 0;
}

int cmd_verify(const std::string& sidecar_path) {
  const Sidecar sc = read_sidecar(read_text_file(sidecar_path));
  const std::string expect = manifest_hash(sc.manifest);
  int bad = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::printf("%-8s %s\n", ok ? "ok" : "MISMATCH", what.c_str());
    if (!ok) ++bad;
  };
  report(expect == sc.stored_hash, "manifest hash");
  // the config hash is FNV over the serialized text, so it re-derives
  // directly from the sidecar without touching the current environment
  report(fnv1a_hex(sc.manifest.config_text) == sc.manifest.config_hash,
         "config hash");
  std::string dir = std::filesystem::path(sidecar_path).parent_path().string();
  if (dir.empty()) dir = ".";
  for (const auto& [name, hash] : sc.files) {
    std::string bytes;
    try {
      bytes = read_text_file(dir + "/" + name);
    } catch (const ConfigError&) {
      report(false, name + " (missing)");
      continue;
    }
    bool ok = fnv1a_hex(bytes) == hash;
    if (ok) {
      try {
        ok = read_csv(bytes).manifest_hash == expect;
      } catch (const ConfigError&) {
        ok = false;
      }
    }
    report(ok, name);
  }
  if (bad) {
    std::printf("verification FAILED: %d mismatch%s\n", bad,
                bad == 1 ? "" : "es");
    return 4;
  }
  std::printf("verification ok: manifest and %zu file%s match\n",
              sc.files.size(), sc.files.size() == 1 ? "" : "s");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-ensemble photodetector simulator: IV, depletion, spectra, "
               "contrast, calibration"};
  app.require_subcommand(1);
  Common com;

  double power_mw = 0;
  std::string rf = "off";
  std::string u_range;
  std::string u_list = "10,30,50,70,90,110,130,150";
  std::string filter_s = "nvminus";
  std::string f_range = "1.85:2.15:0.01";
  std::string polarity = "A";
  double bias = 150.0;
  std::string pairs = "5:100,10:400";
  std::string data_path;
  double seed_phi1 = 0, seed_eta = 0, seed_a_eff = 0;
  std::string sidecar_path;

  auto add_power_rf = [&](CLI::App* sub) {
    sub->add_option("--power", power_mw, "optical power [mW]");
    sub->add_option("--rf", rf, "RF drive on|off")
        ->check(CLI::IsMember({"on", "off"}));
  };

  CLI::App* iv = app.add_subcommand("iv", "bias sweep of the photocurrent");
  add_common(iv, com);
  add_power_rf(iv);
  iv->add_option("--u-range", u_range, "bias sweep start:stop:step [V]");

  CLI::App* drc = app.add_subcommand(
      "dr", "depletion metrics and delta-PL profiles per bias");
  add_common(drc, com);
  add_power_rf(drc);
  drc->add_option("--u-list", u_list, "comma-separated biases [V]")
      ->capture_default_str();
  drc->add_option("--filter", filter_s, "PL collection filter")
      ->check(CLI::IsMember({"nvminus", "nvzero"}))
      ->capture_default_str();

  CLI::App* sp = app.add_subcommand(
      "spectrum", "RF-frequency scan of electrical and optical contrast");
  add_common(sp, com);
  add_power_rf(sp);
  sp->add_option("--f-range", f_range, "frequency scan start:stop:step [GHz]")
      ->capture_default_str();
  sp->add_option("--bias", bias, "applied bias [V]")->capture_default_str();
  sp->add_option("--polarity", polarity, "positive electrode")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();

  CLI::App* ct = app.add_subcommand(
      "contrast", "contrast vs bias with regime labels and knees");
  add_common(ct, com);
  add_power_rf(ct);
  ct->add_option("--u-range", u_range, "bias sweep start:stop:step [V]");

  CLI::App* bs = app.add_subcommand(
      "beamstudy", "contrast sweeps across beam sizes at constant intensity");
  add_common(bs, com);
  bs->add_option("--pairs", pairs, "waist_um:power_mW list")
      ->capture_default_str();
  bs->add_option("--u-range", u_range, "bias sweep start:stop:step [V]");

  CLI::App* cal = app.add_subcommand(
      "calibrate", "fit barrier height, ideality, and contact area to IV data");
  add_common(cal, com);
  cal->add_option("--data", data_path, "CSV with u_V and current_A columns")
      ->required();
  cal->add_option("--phi1", seed_phi1, "seed barrier height [V]");
  cal->add_option("--eta", seed_eta, "seed ideality factor");
  cal->add_option("--a-eff", seed_a_eff, "seed contact area [m^2]");

  CLI::App* fp = app.add_subcommand(
      "figure-pack", "full campaign: fig2a..fig3d plot-data CSVs");
  add_common(fp, com);

  CLI::App* vf = app.add_subcommand(
      "verify", "recompute a sidecar's hashes and compare");
  vf->add_option("sidecar", sidecar_path, "path to a run's JSON sidecar")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (vf->parsed()) return cmd_verify(sidecar_path);

    Config cfg = load_common(com);
    auto apply_power_rf = [&](const CLI::App* sub) {
      if (sub->count("--power")) cfg.drive.optical_power = power_mw * 1e-3;
      if (sub->count("--rf")) cfg.drive.rf_enabled = rf == "on";
    };

    if (iv->parsed()) {
      apply_power_rf(iv);
      return cmd_iv(com, cfg, iv->count("--u-range") ? u_range : "0:150:5");
    }
    if (drc->parsed()) {
      apply_power_rf(drc);
      return cmd_dr(com, cfg, u_list, filter_s);
    }
    if (sp->parsed()) {
      apply_power_rf(sp);
      if (sp->count("--polarity"))
        cfg.drive.positive_electrode =
            polarity == "B" ? Electrode::B : Electrode::A;
      return cmd_spectrum(com, cfg, f_range, bias);
    }
    if (ct->parsed()) {
      apply_power_rf(ct);
      return cmd_contrast(com, cfg,
                          ct->count("--u-range") ? u_range : "10:150:5");
    }
    if (bs->parsed())
      return cmd_beamstudy(com, cfg, pairs,
                           bs->count("--u-range") ? u_range : "10:320:10");
    if (cal->parsed()) {
      DiodePair seed = diode_from(cfg.transport, cfg.drive.positive_electrode);
      if (cal->count("--phi1")) seed.phi1 = seed_phi1;
      if (cal->count("--eta")) seed.eta = seed_eta;
      if (cal->count("--a-eff")) seed.a_eff = seed_a_eff;
      return cmd_calibrate(com, cfg, data_path, seed);
    }
    if (fp->parsed()) return cmd_figure_pack(com, cfg);
    return 2;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    try {
      std::filesystem::create_directories(com.out);
      write_text_file(com.out + "/diagnostic.txt",
                      std::string("solver failure\n") + e.what() + "\n");
      std::fprintf(stderr, "diagnostic written to %s/diagnostic.txt\n",
                   com.out.c_str());
    } catch (...) {
    }
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "precondition violated: %s\n", e.what());
    return 2;
  }
}
