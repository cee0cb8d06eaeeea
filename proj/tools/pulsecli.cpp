#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "pulses/pulses.hpp"

using namespace pulses;

namespace {

struct Options {
  std::string family;
  double theta = pi / 2;
  double phi = 0.0;
  bool degrees = false;
  bool use_stdin = false;
  std::string text;
  std::string file;
  bool as_json = false;

  std::string model = "amplitude";
  double eps = 0.0;
  double delta = 0.0;
  bool addressed = false;

  double lo = 0.0, hi = 0.0;
  int points = 0;
  int depth = 2;
  int steps = 0;
  std::string from, to;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_all(std::istream& is) {
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

double angle(const Options& o, double x) { return o.degrees ? x * pi / 180.0 : x; }

bool two_qubit(const std::string& f) { return f == "b2j" || f == "b2wj"; }

// Sequence from --stdin, --sequence or --family/--theta.
Sequence load_sequence(const Options& o) {
  int sources = (o.use_stdin ? 1 : 0) + (o.text.empty() ? 0 : 1) + (o.family.empty() ? 0 : 1);
  if (sources != 1) throw UsageError("give exactly one of --family, --sequence, --stdin");
  if (o.use_stdin) return parse_sequence(read_all(std::cin));
  if (!o.text.empty()) return parse_text_sequence(o.text);
  if (two_qubit(o.family)) throw UsageError(o.family + " is a two-qubit family; use simulate, scan or slope");
  Sequence s = synthesize(o.family, angle(o, o.theta));
  if (o.phi != 0.0) s = retarget(s, conjugate(exp_su2(Vec3(0, 0, angle(o, o.phi))), s.target));
  return s;
}

ErrorModel make_model(const Options& o) {
  ErrorModel m;
  m.kind = model_kind_from_name(o.model);
  m.eps = o.eps;
  m.delta = o.delta;
  m.addressed = o.addressed;
  return m;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

template <class M>
void print_matrix(const Eigen::MatrixBase<M>& u) {
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      if (j) std::cout << "  ";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g%+.12gi", u(i, j).real() + 0.0, u(i, j).imag() + 0.0);
      std::cout << buf;
    }
    std::cout << "\n";
  }
}

void print_fidelity(double f, double infid) {
  std::printf("fidelity %.12f\ninfidelity %s\n", f, fmt12(infid).c_str());
}

// Two-qubit gate under its error parameters; ising drives eps_J, amplitude eps_A.
Unitary4 two_qubit_gate(const Options& o, const ErrorModel& m) {
  double th = angle(o, o.theta);
  double ej = 0.0, ea = 0.0;
  if (m.kind == ModelKind::ising)
    ej = m.eps;
  else if (m.kind == ModelKind::amplitude)
    ea = m.eps;
  else
    throw Failure(Fault::incompatible_model, "two-qubit families take the ising or amplitude model");
  if (o.family == "b2j") {
    if (ea != 0.0) throw Failure(Fault::incompatible_model, "b2j has exact single-qubit pulses");
    return b2j(th, ej);
  }
  return b2wj(th, ej, ea);
}

std::vector<double> grid_from(const Options& o, const Config& c) {
  double lo = o.lo > 0 ? o.lo : c.grid_min;
  double hi = o.hi > 0 ? o.hi : c.grid_max;
  int n = o.points > 0 ? o.points : c.grid_points;
  return log_grid(lo, hi, n);
}

ScanResult run_scan(const Options& o, const Config& c) {
  ErrorModel m = make_model(o);
  auto grid = grid_from(o, c);
  if (!o.family.empty() && two_qubit(o.family)) {
    Unitary4 target = u_zz(angle(o, o.theta));
    return scan_function(o.family, m,
                         [&](double e) { return infidelity(target, two_qubit_gate(o, m.with_strength(e))); },
                         grid);
  }
  return scan(load_sequence(o), m, grid);
}

int cmd_synth(const Options& o) {
  Sequence s = load_sequence(o);
  if (o.to == "text")
    std::cout << format_text_sequence(s) << "\n";
  else
    print_json(sequence_to_json(s));
  return 0;
}

int cmd_simulate(const Options& o) {
  ErrorModel m = make_model(o);
  if (!o.family.empty() && two_qubit(o.family)) {
    Unitary4 u = two_qubit_gate(o, m), t = u_zz(angle(o, o.theta));
    double f = fidelity(t, u), inf = infidelity(t, u);
    if (o.as_json) {
      print_json({{"unitary", matrix_to_json(u)}, {"target", matrix_to_json(t)}, {"fidelity", sig12(f)},
                  {"infidelity", sig12(inf)}});
    } else {
      print_matrix(u);
      print_fidelity(f, inf);
    }
    return 0;
  }
  Sequence s = load_sequence(o);
  Unitary2 u = apply_sequence(s, m);
  Unitary2 t = model_target(s, m);
  double f = fidelity(t, u), inf = m.two_parameter() || m.kind == ModelKind::ising
                                       ? infidelity(t, u)
                                       : sequence_infidelity(s, m, t);
  if (o.as_json) {
    print_json({{"sequence", s.family}, {"model", model_to_json(m)}, {"unitary", matrix_to_json(u)},
                {"target", matrix_to_json(t)}, {"fidelity", sig12(f)}, {"infidelity", sig12(inf)}});
  } else {
    print_matrix(u);
    print_fidelity(f, inf);
  }
  return 0;
}

int cmd_terms(const Options& o) {
  if (o.depth < 1 || o.depth > 3) throw UsageError("--depth must be 1, 2 or 3");
  Sequence s = load_sequence(o);
  MagnusTerms t = interaction_terms(s, make_model(o), std::max(2, o.depth));
  if (o.as_json) {
    print_json(terms_to_json(t));
    return 0;
  }
  auto line = [](const char* n, const Vec3& v) {
    std::cout << n << " " << fmt12(v.x()) << " " << fmt12(v.y()) << " " << fmt12(v.z()) << "\n";
  };
  line("omega1", t.omega1);
  if (o.depth >= 2) line("omega2", t.omega2);
  if (t.has_omega3) line("omega3", t.omega3);
  std::cout << "truncation_estimate " << fmt12(t.truncation_estimate) << "\n";
  return 0;
}

int cmd_path(const Options& o) {
  Sequence s = load_sequence(o);
  AlgebraPath p = path(s, make_model(o));
  if (o.as_json) {
    json samples = json::array();
    for (const auto& x : p.samples) samples.push_back({sig12(x.t), sig12(x.v.x()), sig12(x.v.y()), sig12(x.v.z())});
    print_json({{"samples", samples},
                {"closure_residual", sig12(p.closure_residual)},
                {"signed_area", vec_to_json(p.signed_area)}});
  } else {
    write_path_csv(std::cout, p);
  }
  return 0;
}

int cmd_scan(const Options& o, const Config& c) {
  ScanResult r = run_scan(o, c);
  if (o.as_json)
    print_json(scan_to_json(r));
  else
    write_scan_csv(std::cout, r);
  return 0;
}

int cmd_slope(const Options& o, const Config& c) {
  ScanResult r = run_scan(o, c);
  SlopeFit f = fit_order(r, c.fit);
  if (o.as_json) {
    json j = fit_to_json(f);
    j["sequence"] = r.sequence_label;
    j["model"] = model_to_json(r.model);
    print_json(j);
  } else {
    std::cout << "slope " << fmt12(f.slope) << "\nintercept " << fmt12(f.intercept) << "\nr_squared "
              << fmt12(f.r_squared) << "\nwindow " << fmt12(f.window_lo) << " " << fmt12(f.window_hi)
              << "\npoints " << f.points << "\n";
  }
  return 0;
}

int cmd_grid(const Options& o, const Config& c) {
  ModelKind k = model_kind_from_name(o.model);
  double lo = o.lo > 0 ? o.lo : 0.3, hi = o.hi > 0 ? o.hi : 0.3;
  int n = o.points > 0 ? o.points : 41;
  if (n < 2) throw UsageError("--points must be at least 2");
  std::vector<double> g1(n), g2(n);
  for (int i = 0; i < n; ++i) {
    g1[i] = -lo + 2.0 * lo * i / (n - 1);
    g2[i] = -hi + 2.0 * hi * i / (n - 1);
  }
  GridResult r = grid2(load_sequence(o), k, g1, g2, c.threads);
  if (o.as_json) {
    json rows = json::array();
    for (size_t i = 0; i < r.eps1.size(); ++i) {
      json row = json::array();
      for (size_t j = 0; j < r.eps2.size(); ++j) row.push_back(sig12(r.value(i, j)));
      rows.push_back(row);
    }
    long inside = std::count(r.mask.begin(), r.mask.end(), true);
    json e1 = json::array(), e2 = json::array();
    for (double x : r.eps1) e1.push_back(sig12(x));
    for (double x : r.eps2) e2.push_back(sig12(x));
    print_json({{"sequence", r.label}, {"model", model_name(k)}, {"eps1", e1}, {"eps2", e2},
                {"infidelity", rows}, {"contour", r.contour}, {"inside", inside}});
  } else {
    write_grid_csv(std::cout, r);
  }
  return 0;
}

int cmd_waveform_check(const Options& o, const Config& c) {
  Waveform w;
  std::optional<Sequence> square;
  int sources = (o.use_stdin ? 1 : 0) + (o.file.empty() ? 0 : 1) + (o.family.empty() && o.text.empty() ? 0 : 1);
  if (sources != 1) throw UsageError("give exactly one of --file, --stdin, --family/--sequence");
  if (o.use_stdin) {
    w = parse_waveform(read_all(std::cin));
  } else if (!o.file.empty()) {
    std::ifstream f(o.file);
    if (!f) throw UsageError("cannot open " + o.file);
    w = parse_waveform(read_all(f));
  } else {
    square = load_sequence(o);
    w = square_waveform(*square);
  }
  int steps = o.steps > 0 ? o.steps : c.steps;
  auto [rc, rs] = first_order_residuals(w);
  MagnusTerms t = waveform_terms(w, 2);
  Propagation pr = propagate_checked(w, o.delta, steps);
  const Unitary2& u = pr.u;
  Unitary2 ideal = rotation(accumulated_angle(w, w.tau), 0.0);
  json j = {{"tau", sig12(w.tau)},
            {"residual_cos", sig12(rc)},
            {"residual_sin", sig12(rs)},
            {"omega1", vec_to_json(t.omega1)},
            {"omega2", vec_to_json(t.omega2)},
            {"delta", sig12(o.delta)},
            {"steps", pr.steps},
            {"discretization_defect", sig12(pr.defect)},
            {"unitary", matrix_to_json(u)},
            {"infidelity_vs_ideal", sig12(infidelity(ideal, u))}};
  if (square) {
    Unitary2 v = apply_sequence(*square, ErrorModel::detuning(o.delta));
    j["square_pulse_distance"] = sig12(infidelity(v, u));
  }
  if (o.as_json) {
    print_json(j);
  } else {
    std::cout << "tau " << fmt12(w.tau) << "\nresidual_cos " << fmt12(rc) << "\nresidual_sin " << fmt12(rs)
              << "\nomega1_norm " << fmt12(t.omega1.norm()) << "\nsteps " << pr.steps
              << "\ndiscretization_defect " << fmt12(pr.defect) << "\ninfidelity_vs_ideal "
              << fmt12(infidelity(ideal, u)) << "\n";
    if (square) std::cout << "square_pulse_distance " << fmt12(j["square_pulse_distance"].get<double>()) << "\n";
    print_matrix(u);
  }
  return 0;
}

int cmd_convert(const Options& o) {
  std::string in;
  if (!o.file.empty()) {
    std::ifstream f(o.file);
    if (!f) throw UsageError("cannot open " + o.file);
    in = read_all(f);
  } else {
    in = read_all(std::cin);
  }
  const std::string& to = o.to;
  if (o.from == "json" || o.from == "text") {
    Sequence s = parse_sequence(in);
    if (to == "text")
      std::cout << format_text_sequence(s) << "\n";
    else if (to == "json")
      print_json(sequence_to_json(s));
    else if (to == "csv")
      write_waveform_csv(std::cout, square_waveform(s));
    else
      throw UsageError("sequences convert to json, text or csv");
    return 0;
  }
  Waveform w = parse_waveform(in);
  if (to == "csv")
    write_waveform_csv(std::cout, w);
  else if (to == "json")
    print_json(waveform_to_json(o.from == "fourier" ? w : render(w)));
  else
    throw UsageError("waveforms convert to csv or json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite pulse synthesis, simulation and verification"};
  app.require_subcommand(1);
  Options o;
  Config cfg;
  try {
    cfg = config_from_env();
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  auto source = [&](CLI::App* c) {
    c->add_option("--family", o.family, "sequence family name");
    c->add_option("--theta", o.theta, "target rotation angle");
    c->add_option("--phi", o.phi, "target rotation phase");
    c->add_flag("--degrees", o.degrees, "angles in degrees");
    c->add_flag("--stdin", o.use_stdin, "read the sequence (JSON or text) from stdin");
    c->add_option("--sequence", o.text, "pulse list as 'theta@phi theta@phi ...'");
    c->add_flag("--json", o.as_json, "machine-readable output");
  };
  auto model = [&](CLI::App* c) {
    c->add_option("--model", o.model, "error model")
        ->check(CLI::IsMember({"amplitude", "pulse_length", "addressing", "detuning", "amplitude_detuning",
                               "pulse_length_detuning", "ising"}));
    c->add_option("--eps", o.eps, "error strength");
    c->add_option("--delta", o.delta, "detuning over Rabi frequency");
    c->add_flag("--addressed", o.addressed, "addressed spin under the addressing model");
  };
  auto grid = [&](CLI::App* c) {
    c->add_option("--min", o.lo, "smallest error strength (grid: half-width of first axis)");
    c->add_option("--max", o.hi, "largest error strength (grid: half-width of second axis)");
    c->add_option("--points", o.points, "grid points");
  };

  auto* synth = app.add_subcommand("synth", "emit a sequence");
  synth->add_option("name", o.family, "family name");
  source(synth);
  synth->add_option("--format", o.to, "json or text")->check(CLI::IsMember({"json", "text"}));

  auto* simulate = app.add_subcommand("simulate", "apply a sequence under an error model");
  source(simulate);
  model(simulate);

  auto* terms = app.add_subcommand("terms", "interaction-frame Magnus terms");
  source(terms);
  model(terms);
  terms->add_option("--depth", o.depth, "highest term (2 or 3)");

  auto* pathc = app.add_subcommand("path", "error-vector path as CSV");
  source(pathc);
  model(pathc);

  auto* scanc = app.add_subcommand("scan", "infidelity against error strength");
  source(scanc);
  model(scanc);
  grid(scanc);

  auto* slope = app.add_subcommand("slope", "fitted infidelity order");
  source(slope);
  model(slope);
  grid(slope);

  auto* gridc = app.add_subcommand("grid", "simultaneous two-parameter error grid");
  source(gridc);
  model(gridc);
  grid(gridc);

  auto* wave = app.add_subcommand("waveform-check", "first-order detuning check of a waveform");
  source(wave);
  wave->add_option("--file", o.file, "waveform CSV or JSON");
  wave->add_option("--delta", o.delta, "detuning over Rabi frequency");
  wave->add_option("--steps", o.steps, "propagation steps");

  auto* convert = app.add_subcommand("convert", "convert between formats");
  convert->add_option("--from", o.from, "json, text, fourier, csv")
      ->required()
      ->check(CLI::IsMember({"json", "text", "fourier", "csv"}));
  convert->add_option("--to", o.to, "json, text, csv")->required()->check(CLI::IsMember({"json", "text", "csv"}));
  convert->add_option("--file", o.file, "input file (default stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (terms->parsed()) return cmd_terms(o);
    if (pathc->parsed()) return cmd_path(o);
    if (scanc->parsed()) return cmd_scan(o, cfg);
    if (slope->parsed()) return cmd_slope(o, cfg);
    if (gridc->parsed()) {
      if (o.model == "amplitude") o.model = "amplitude_detuning";
      return cmd_grid(o, cfg);
    }
    if (wave->parsed()) return cmd_waveform_check(o, cfg);
    if (convert->parsed()) return cmd_convert(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.fault() == Fault::parse_error || e.fault() == Fault::out_of_range ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
