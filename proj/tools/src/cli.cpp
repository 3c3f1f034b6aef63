#include "hawkesvol/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hawkesvol/density_pde.hpp"
#include "hawkesvol/diffusion.hpp"
#include "hawkesvol/error.hpp"
#include "hawkesvol/event_stream.hpp"
#include "hawkesvol/kv_config.hpp"
#include "hawkesvol/market_data.hpp"
#include "hawkesvol/mle.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/realized_vol.hpp"
#include "hawkesvol/simulate.hpp"
#include "hawkesvol/smle.hpp"

namespace hawkesvol::cli {

namespace {

namespace fs = std::filesystem;

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail_io("cannot write " + path);
  f << text;
  if (!f) fail_io("write failed for " + path);
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_io("cannot create directory " + dir + ": " + ec.message());
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

std::string numbered(const std::string& dir, const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.csv", prefix, i);
  return (fs::path(dir) / buf).string();
}

std::string num(double v) { return format_double(v); }

std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

BetaGridSpec parse_beta_grid(const std::string& text) {
  BetaGridSpec g;
  double v[3];
  std::stringstream ss(text);
  std::string part;
  int k = 0;
  while (std::getline(ss, part, ':')) {
    if (k == 3) fail_validation("--beta-grid expects lo:hi:step");
    try {
      std::size_t used = 0;
      v[k] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      fail_validation("--beta-grid expects lo:hi:step, got " + text);
    }
    ++k;
  }
  if (k != 3) fail_validation("--beta-grid expects lo:hi:step, got " + text);
  g.lo = v[0];
  g.hi = v[1];
  g.step = v[2];
  if (!(g.lo > 0) || !(g.hi >= g.lo) || !(g.step > 0)) fail_validation("--beta-grid needs 0 < lo <= hi and step > 0");
  return g;
}

// Minimal headered CSV reader for the tool's own outputs.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail_validation("csv lacks column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open " + path);
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty())
      t.header = split_commas(line);
    else
      t.rows.push_back(split_commas(line));
  }
  if (t.header.empty()) fail_validation(path + " is empty");
  return t;
}

double cell_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  if (s == "nan" || s == "NaN") return std::nan("");
  fail_validation("not a number: '" + s + "'");
}

SymmetricHawkesParams read_symmetric(const std::string& path) {
  auto kv = KvMap::read_file(path);
  if (kv_is_full_model(kv)) fail_validation(path + " holds full-model parameters; this command needs symmetric ones");
  auto p = symmetric_from_kv(kv);
  require_valid(p);
  return p;
}

DiffusionParams read_diffusion(const std::string& path) {
  auto p = diffusion_from_kv(KvMap::read_file(path));
  require_valid(p);
  return p;
}

PriceSeries read_prices(const std::string& path, bool from_events, double tick, double s0) {
  if (!from_events) return read_price_csv(path);
  if (!(tick > 0) || !(s0 > 0)) fail_validation("--events needs --tick > 0 and --s0 > 0");
  return price_series_from_stream(read_event_csv(path), tick, s0);
}

std::vector<double> sample_stats(const std::vector<double>& xs) {
  std::vector<double> clean;
  for (double x : xs)
    if (std::isfinite(x)) clean.push_back(x);
  const double n = static_cast<double>(clean.size());
  double mean = 0.0, ss = 0.0;
  for (double x : clean) mean += x / n;
  for (double x : clean) ss += (x - mean) * (x - mean);
  return {clean.empty() ? std::nan("") : mean, clean.size() > 1 ? std::sqrt(ss / (n - 1.0)) : std::nan(""), n};
}

// ---- simulate

struct SimulateArgs {
  std::string params, out_dir;
  double horizon = kSessionSeconds;
  std::uint64_t seed = 0;
  std::size_t paths = 1;
  std::vector<double> start;
};

void add_simulate(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<SimulateArgs>();
  auto* c = app.add_subcommand("simulate", "Simulate Hawkes event streams to CSV files");
  c->add_option("--params", a->params, "Parameter file (symmetric or full model keys)")->required();
  c->add_option("--horizon", a->horizon, "Horizon in seconds")->capture_default_str();
  c->add_option("--seed", a->seed, "Random seed")->capture_default_str();
  c->add_option("--paths", a->paths, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--out-dir", a->out_dir, "Directory receiving path_NNNNN.csv")->required();
  c->add_option("--start", a->start,
                "Explicit start: total intensities (2 values, symmetric) or excess components (4 values, full); "
                "default stationary")
      ->expected(2, 4);
  c->callback([a, &out] {
    auto kv = KvMap::read_file(a->params);
    SimConfig cfg;
    cfg.horizon = a->horizon;
    cfg.seed = a->seed;
    if (!a->start.empty()) {
      cfg.init = InitMode::Explicit;
      cfg.initial_values = a->start;
    }
    std::vector<EventStream> streams(a->paths);
    if (kv_is_full_model(kv)) {
      auto p = full_from_kv(kv);
      require_valid(p);
      parallel_for(a->paths, [&](std::size_t i) {
        auto ci = cfg;
        ci.path_index = i;
        streams[i] = simulate(p, ci);
      });
    } else {
      auto p = symmetric_from_kv(kv);
      require_valid(p);
      streams = simulate_batch(p, cfg, a->paths);
    }
    make_dir(a->out_dir);
    std::string summary = "path,file,n_up,n_down,horizon\n";
    for (std::size_t i = 0; i < streams.size(); ++i) {
      const auto file = numbered(a->out_dir, "path", i);
      write_event_csv(file, streams[i]);
      summary += join({std::to_string(i), file, std::to_string(streams[i].up_times.size()),
                       std::to_string(streams[i].down_times.size()), num(streams[i].horizon)});
    }
    out << summary;
  });
}

// ---- fit

struct FitArgs {
  std::vector<std::string> streams;
  std::string model = "reparam", method = "newton", beta_grid, init, out, summary, start = "stationary";
  double tick = 0.025, s0 = 100.0;
  std::size_t min_events = 50;
};

std::string generic_header(const FitResult& r) {
  std::string h = "date";
  for (auto& n : r.names) h += "," + n;
  for (auto& n : r.names) h += ",se_" + n;
  return h + ",loglik,iterations,converged,method";
}

std::string generic_row(const std::string& date, const FitResult& r) {
  std::string row = date;
  for (double v : r.estimates) row += "," + num(v);
  for (double v : r.std_errors) row += "," + num(v);
  return row + "," + num(r.loglik) + "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," +
         to_string(r.method);
}

void add_fit(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<FitArgs>();
  auto* c = app.add_subcommand("fit", "Maximum-likelihood fit of event stream CSVs");
  c->add_option("streams", a->streams, "Event stream CSV files")->required();
  c->add_option("--model", a->model, "sym, full or reparam")
      ->check(CLI::IsMember({"sym", "full", "reparam"}))
      ->capture_default_str();
  c->add_option("--method", a->method, "grid (profile over beta) or newton (quasi-Newton)")
      ->check(CLI::IsMember({"grid", "newton"}))
      ->capture_default_str();
  c->add_option("--beta-grid", a->beta_grid, "Beta grid lo:hi:step for --method grid (default 1:3:0.001)");
  c->add_option("--init", a->init, "Initial parameter file; default is a moment-based guess");
  c->add_option("--tick", a->tick, "Tick size used for sigma_ann")->capture_default_str();
  c->add_option("--s0", a->s0, "Reference price used for sigma_ann")->capture_default_str();
  c->add_option("--start", a->start, "Intensity at time 0: stationary or ignition")
      ->check(CLI::IsMember({"stationary", "ignition"}))
      ->capture_default_str();
  c->add_option("--min-events", a->min_events, "Minimum events per side")->capture_default_str();
  c->add_option("--out", a->out, "Fit CSV (default stdout)");
  c->add_option("--summary", a->summary, "Mean/std summary CSV over converged fits");
  c->callback([a, &out] {
    FitOptions opts;
    opts.method = a->method == "grid" ? FitMethod::BetaGrid : FitMethod::QuasiNewton;
    if (!a->beta_grid.empty()) opts.grid = parse_beta_grid(a->beta_grid);
    opts.start = a->start == "ignition" ? InitialIntensity::ignition() : InitialIntensity::stationary();
    opts.min_events_per_side = a->min_events;
    std::optional<KvMap> init_kv;
    if (!a->init.empty()) init_kv = KvMap::read_file(a->init);

    std::vector<EventStream> streams;
    for (auto& f : a->streams) streams.push_back(read_event_csv(f));
    std::vector<FitResult> fits(streams.size());
    parallel_for(streams.size(), [&](std::size_t i) {
      const auto& s = streams[i];
      if (a->model == "full") {
        FullHawkesParams init = init_kv && kv_is_full_model(*init_kv)
                                    ? full_from_kv(*init_kv)
                                    : FullHawkesParams::from_symmetric(
                                          init_kv ? symmetric_from_kv(*init_kv) : default_initial_guess(s));
        fits[i] = fit_full(s, init, opts);
        return;
      }
      auto init = init_kv ? symmetric_from_kv(*init_kv) : default_initial_guess(s);
      init.tick = a->tick;
      init.s0 = a->s0;
      fits[i] = a->model == "sym" ? fit_symmetric(s, init, opts) : fit_symmetric_reparam(s, init, opts);
    });

    std::string csv = (a->model == "full" ? generic_header(fits.front()) : fit_csv_header()) + "\n";
    for (std::size_t i = 0; i < fits.size(); ++i)
      csv += (a->model == "full" ? generic_row(stem(a->streams[i]), fits[i]) : fit_csv_row(stem(a->streams[i]), fits[i])) +
             "\n";
    emit(csv, a->out, out);

    if (!a->summary.empty()) {
      std::string s = "name,mean,std,n\n";
      for (std::size_t k = 0; k < fits.front().names.size(); ++k) {
        std::vector<double> xs;
        for (auto& f : fits)
          if (f.converged) xs.push_back(f.estimates[k]);
        auto st = sample_stats(xs);
        s += join({fits.front().names[k], num(st[0]), num(st[1]), std::to_string(static_cast<std::size_t>(st[2]))});
      }
      emit(s, a->summary, out);
    }
  });
}

// ---- vol

struct VolArgs {
  std::string params, fit, out;
  double tick = 0.025, s0 = 100.0, year = kSecondsPerYear;
  std::vector<double> horizons;
};

void add_vol(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<VolArgs>();
  auto* c = app.add_subcommand("vol", "Hawkes volatility from parameters or fit results");
  auto* p = c->add_option("--params", a->params, "Symmetric parameter file");
  auto* f = c->add_option("--fit", a->fit, "Fit CSV produced by the fit command");
  p->excludes(f);
  c->add_option("--tick", a->tick, "Tick size for fit rows")->capture_default_str();
  c->add_option("--s0", a->s0, "Reference price for fit rows")->capture_default_str();
  c->add_option("--year-seconds", a->year, "Seconds per year for annualization")->capture_default_str();
  c->add_option("--horizon", a->horizons, "Also report the return variance at these horizons (seconds)");
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    if (a->params.empty() == a->fit.empty()) fail_validation("vol needs exactly one of --params or --fit");
    VolConvention conv;
    conv.year_seconds = a->year;
    if (!(conv.year_seconds > 0)) fail_validation("--year-seconds must be > 0");
    std::vector<std::pair<std::string, SymmetricHawkesParams>> sets;
    if (!a->params.empty()) {
      sets.emplace_back(stem(a->params), read_symmetric(a->params));
    } else {
      auto t = read_table(a->fit);
      const auto cd = t.column("date"), cm = t.column("mu"), cs = t.column("alpha_s"), cc = t.column("alpha_c"),
                 cb = t.column("beta");
      for (auto& r : t.rows) {
        if (r.size() < t.header.size()) fail_validation("short row in " + a->fit);
        SymmetricHawkesParams q;
        q.mu = cell_double(r[cm]);
        q.alpha_s = cell_double(r[cs]);
        q.alpha_c = cell_double(r[cc]);
        q.beta = cell_double(r[cb]);
        q.tick = a->tick;
        q.s0 = a->s0;
        sets.emplace_back(r[cd], q);
      }
    }
    std::vector<std::string> head = {"label", "mu", "alpha_s", "alpha_c", "beta", "rel_tick", "sigma_ann"};
    for (double t : a->horizons) head.push_back("return_variance_" + num(t));
    std::string csv = join(head);
    for (auto& [label, q] : sets) {
      require_valid(q);
      std::vector<std::string> row = {label, num(q.mu), num(q.alpha_s), num(q.alpha_c), num(q.beta),
                                      num(q.rel_tick()), num(annualized_vol(q, conv))};
      for (double t : a->horizons) row.push_back(num(return_variance(q, t)));
      csv += join(row);
    }
    emit(csv, a->out, out);
  });
}

// ---- moments

struct MomentArgs {
  std::string params, out;
  std::vector<double> horizons;
};

void add_moments(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<MomentArgs>();
  auto* c = app.add_subcommand("moments", "Closed-form count and intensity moments");
  c->add_option("--params", a->params, "Symmetric parameter file")->required();
  c->add_option("--horizon", a->horizons, "Horizons in seconds")->required();
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    auto p = read_symmetric(a->params);
    std::string csv = "t,e_n1,e_n2,e_n1_sq,e_n1_n2,e_diff_sq,e_l1_sq,e_l1_l2,e_l1_n1,e_l1_n2,return_variance\n";
    for (double t : a->horizons) {
      if (!(t > 0)) fail_validation("horizons must be > 0");
      auto m = moment_oracles(p, t);
      csv += join({num(t), num(m.expected_counts[0]), num(m.expected_counts[1]), num(m.e_n1_sq), num(m.e_n1_n2),
                   num(m.e_diff_sq), num(m.e_l1_sq), num(m.e_l1_l2), num(m.e_l1_n1), num(m.e_l1_n2),
                   num(m.return_variance)});
    }
    emit(csv, a->out, out);
  });
}

// ---- tsrv / sigplot

struct PriceInputArgs {
  bool events = false;
  double tick = 0.0;
  double s0 = 0.0;
};

void add_price_input(CLI::App* c, PriceInputArgs& a) {
  c->add_flag("--events", a.events, "Inputs are event stream CSVs instead of time,price CSVs");
  c->add_option("--tick", a.tick, "Tick size for --events inputs");
  c->add_option("--s0", a.s0, "Reference price: start price for --events, return base otherwise (0 = first price)")
      ->capture_default_str();
}

struct TsrvArgs {
  std::vector<std::string> inputs;
  PriceInputArgs in;
  TsrvOptions opts;
  std::string out;
};

void add_tsrv(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<TsrvArgs>();
  auto* c = app.add_subcommand("tsrv", "Two-scale realized volatility of price series");
  c->add_option("inputs", a->inputs, "Price CSV files")->required();
  add_price_input(c, a->in);
  c->add_option("--small-scale", a->opts.small_scale, "Fine sampling interval in seconds")->capture_default_str();
  c->add_option("--large-scale", a->opts.large_scale, "Coarse sampling interval in seconds")->capture_default_str();
  c->add_option("--session-seconds", a->opts.session_seconds, "Session length (0 = span of the data)")
      ->capture_default_str();
  c->add_flag("--log-returns", a->opts.returns.log_returns, "Use log returns");
  c->add_flag("--adjust", a->opts.small_sample_adjustment, "Apply the small-sample factor");
  c->add_option("--year-seconds", a->opts.vol.year_seconds, "Seconds per year")->capture_default_str();
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    std::vector<TsrvResult> res(a->inputs.size());
    for (std::size_t i = 0; i < a->inputs.size(); ++i) {
      auto series = read_prices(a->inputs[i], a->in.events, a->in.tick, a->in.s0);
      auto opts = a->opts;
      opts.returns.s0 = a->in.s0;
      res[i] = tsrv(series, opts);
    }
    std::string csv = "file,variance,annualized_vol,naive_small_scale_vol,n_returns\n";
    for (std::size_t i = 0; i < res.size(); ++i)
      csv += join({stem(a->inputs[i]), num(res[i].variance), num(res[i].annualized_vol),
                   num(res[i].naive_small_scale_vol), std::to_string(res[i].n_returns)});
    emit(csv, a->out, out);
  });
}

struct SigplotArgs {
  std::string input, diffusion, out;
  PriceInputArgs in;
  std::vector<double> taus = {1, 2, 5, 10, 20, 30, 60, 120, 300};
  double grid_step = 1.0;
};

void add_sigplot(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<SigplotArgs>();
  auto* c = app.add_subcommand("sigplot", "Empirical and mean signature plots");
  c->add_option("input", a->input, "Price CSV file")->required();
  add_price_input(c, a->in);
  c->add_option("--tau", a->taus, "Sampling intervals in seconds (multiples of the grid step)")->capture_default_str();
  c->add_option("--grid-step", a->grid_step, "Previous-tick grid step in seconds")->capture_default_str();
  c->add_option("--diffusion", a->diffusion, "Diffusion parameter file; adds the mean signature plot column");
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    auto series = read_prices(a->input, a->in.events, a->in.tick, a->in.s0);
    auto grid = sample_on_grid(series, series.times.front(), series.times.back(), a->grid_step);
    ReturnConvention rc;
    rc.s0 = a->in.s0;
    auto r = returns_from_prices(grid, rc);
    std::optional<DiffusionParams> dp;
    if (!a->diffusion.empty()) dp = read_diffusion(a->diffusion);
    std::string csv = dp ? "tau,empirical,mean\n" : "tau,empirical\n";
    for (double tau : a->taus) {
      std::vector<std::string> row = {num(tau), num(realized_variance(r, a->grid_step, tau))};
      if (dp) row.push_back(num(mean_signature_plot(*dp, tau)));
      csv += join(row);
    }
    emit(csv, a->out, out);
  });
}

// ---- diffusion commands

struct DiffSimArgs {
  std::string params, out, prices_dir;
  DiffusionSimSpec spec;
  double sample_step = 0.0;
};

void add_diff_sim(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<DiffSimArgs>();
  auto* c = app.add_subcommand("diff-sim", "Euler simulation of the diffusion analogue");
  c->add_option("--params", a->params, "Diffusion parameter file (kappa/theta keys or m, a_s, a_c, b, delta)")
      ->required();
  c->add_option("--horizon", a->spec.horizon, "Horizon in seconds")->capture_default_str();
  c->add_option("--dt", a->spec.dt, "Euler step in seconds")->capture_default_str();
  c->add_option("--paths", a->spec.n_paths, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--seed", a->spec.seed, "Random seed")->capture_default_str();
  c->add_flag("--third-moment", a->spec.third_moment, "Add the realized third moment variation column");
  c->add_option("--sample-step", a->sample_step, "Record prices every this many seconds (0 = terminal only)")
      ->capture_default_str();
  c->add_option("--prices-dir", a->prices_dir, "Directory receiving path_NNNNN.csv price files (needs --sample-step)");
  c->add_option("--out", a->out, "Per-path summary CSV (default stdout)");
  c->callback([a, &out] {
    auto p = read_diffusion(a->params);
    auto spec = a->spec;
    if (a->sample_step < 0) fail_validation("--sample-step must be >= 0");
    if (!a->prices_dir.empty() && !(a->sample_step > 0)) fail_validation("--prices-dir needs --sample-step > 0");
    if (a->sample_step > 0)
      for (double t = 0.0; t <= spec.horizon + 1e-9; t += a->sample_step) spec.sample_times.push_back(t);
    auto paths = simulate_paths(p, spec);
    std::string csv = spec.third_moment ? "path,terminal_s,terminal_n,terminal_v,third_moment\n"
                                        : "path,terminal_s,terminal_n,terminal_v\n";
    for (std::size_t i = 0; i < paths.terminal_s.size(); ++i) {
      std::vector<std::string> row = {std::to_string(i), num(paths.terminal_s[i]), num(paths.terminal_n[i]),
                                      num(paths.terminal_v[i])};
      if (spec.third_moment) row.push_back(num(paths.third_moment[i]));
      csv += join(row);
    }
    if (!a->prices_dir.empty()) {
      make_dir(a->prices_dir);
      for (std::size_t i = 0; i < paths.samples.size(); ++i) {
        std::string f = "time,price\n";
        for (std::size_t k = 0; k < spec.sample_times.size(); ++k)
          f += num(spec.sample_times[k]) + "," + num(paths.samples[i][k]) + "\n";
        emit(f, numbered(a->prices_dir, "path", i), out);
      }
    }
    emit(csv, a->out, out);
  });
}

struct DiffFitArgs {
  std::vector<std::string> inputs;
  std::string init, out, latent = "stationary";
  SmleConfig cfg;
  bool rho = false;
};

void add_diff_fit(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<DiffFitArgs>();
  auto* c = app.add_subcommand("diff-fit", "Simulated maximum-likelihood fit of the diffusion on price CSVs");
  c->add_option("inputs", a->inputs, "Price CSV files, one per day")->required();
  c->add_option("--init", a->init, "Initial diffusion parameter file")->required();
  c->add_option("--tick", a->cfg.tick, "Tick size delta of the Hawkes chart")->required();
  c->add_option("--obs-interval", a->cfg.obs_interval, "Observation interval in seconds")->capture_default_str();
  c->add_option("--n-sub", a->cfg.n_sub, "Euler substeps per observation interval")->capture_default_str();
  c->add_option("--paths", a->cfg.m_paths, "Simulated paths per interval (M)")->capture_default_str();
  c->add_option("--seed", a->cfg.seed, "Random seed of the common random numbers")->capture_default_str();
  c->add_option("--latent", a->latent, "Start of (n, V) in each interval: stationary or carry")
      ->check(CLI::IsMember({"stationary", "carry"}))
      ->capture_default_str();
  c->add_flag("--rho", a->rho, "Also estimate the leverage correlation");
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    auto init = read_diffusion(a->init);
    auto cfg = a->cfg;
    cfg.latent_init = a->latent == "carry" ? LatentInit::CarryForward : LatentInit::Stationary;
    require_valid(cfg);
    std::string csv = smle_csv_header(a->rho) + "\n";
    for (auto& f : a->inputs) {
      auto series = read_price_csv(f);
      auto fit = fit_diffusion(resample_observations(series, cfg), init, cfg, a->rho);
      csv += smle_csv_row(stem(f), fit, a->rho) + "\n";
    }
    emit(csv, a->out, out);
  });
}

struct RhoArgs {
  std::string params, out;
  DiffusionSimSpec spec;
};

void add_rho_est(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<RhoArgs>();
  a->spec.horizon = 60.0;
  a->spec.n_paths = 10000;
  auto* c = app.add_subcommand("rho-est", "Leverage estimate from the realized third moment variation");
  c->add_option("--params", a->params, "Diffusion parameter file including rho")->required();
  c->add_option("--horizon", a->spec.horizon, "Horizon in seconds")->capture_default_str();
  c->add_option("--dt", a->spec.dt, "Euler step in seconds")->capture_default_str();
  c->add_option("--paths", a->spec.n_paths, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--seed", a->spec.seed, "Random seed")->capture_default_str();
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    auto p = read_diffusion(a->params);
    auto spec = a->spec;
    spec.third_moment = true;
    auto paths = simulate_paths(p, spec);
    auto r = estimate_rho(paths.third_moment, p, spec.horizon);
    emit("rho,std_error,k,n\n" + join({num(r.rho), num(r.std_error), num(r.k), std::to_string(r.n)}), a->out, out);
  });
}

struct DensityArgs {
  std::string params, out, diagnostics;
  double horizon = 30.0, dt = 0.0;
  int psi_intervals = 256, cells = 0, points = 801;
};

void add_density(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<DensityArgs>();
  auto* c = app.add_subcommand("density", "Price density from the transformed Fokker-Planck equation");
  c->add_option("--params", a->params, "Diffusion parameter file")->required();
  c->add_option("--horizon", a->horizon, "Horizon in seconds")->capture_default_str();
  c->add_option("--psi-intervals", a->psi_intervals, "Frequency grid intervals (even)")->capture_default_str();
  c->add_option("--cells", a->cells, "Cells per (n, v) axis (0 = default)")->capture_default_str();
  c->add_option("--dt", a->dt, "Time step (0 = default)")->capture_default_str();
  c->add_option("--points", a->points, "Price grid points")->capture_default_str();
  c->add_option("--diagnostics", a->diagnostics, "Key-value file with mass and moment diagnostics");
  c->add_option("--out", a->out, "Density CSV (default stdout)");
  c->callback([a, &out] {
    auto p = read_diffusion(a->params);
    if (!(a->horizon > 0)) fail_validation("--horizon must be > 0");
    auto g = default_pde_grid(p, a->horizon, a->psi_intervals);
    if (a->cells > 0) g.n_steps = g.v_steps = a->cells;
    if (a->dt > 0) g.dt = a->dt;
    if (a->points < 3) fail_validation("--points must be >= 3");
    auto sol = solve_transformed_pde(p, g);
    auto d = invert_to_price_density(sol, default_price_grid(p, a->horizon, a->points), p.s0);
    emit(density_csv(d), a->out, out);
    if (!a->diagnostics.empty()) {
      KvMap kv;
      kv.set("zero_freq_mass", sol.zero_freq_mass);
      kv.set("boundary_mass", sol.boundary_mass);
      kv.set("mass_defect", d.mass_defect);
      kv.set("mean", density_mean(d));
      kv.set("variance", density_variance(d));
      kv.set("variance_closed_form", return_variance_diffusion(p, a->horizon) * p.s0 * p.s0);
      kv.write_file(a->diagnostics);
    }
  });
}

// ---- market data

struct IngestArgs {
  std::string input, out_dir, out;
  SessionSpec session;
  double tick = 0.0;
};

void add_ingest(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<IngestArgs>();
  auto* c = app.add_subcommand("ingest", "Quote CSV to per-day mid-price event streams");
  c->add_option("input", a->input, "Quote CSV (timestamp,bid,ask,venue)")->required();
  c->add_option("--tick", a->tick, "Tick size of the mid-price")->required();
  c->add_option("--venue", a->session.venue, "Keep only this venue (default all)");
  c->add_option("--session-start", a->session.start, "Session start, seconds of day")->capture_default_str();
  c->add_option("--session-end", a->session.end, "Session end, seconds of day")->capture_default_str();
  c->add_option("--out-dir", a->out_dir, "Directory receiving events_<date>.csv")->required();
  c->add_option("--out", a->out, "Per-day statistics CSV (default stdout)");
  c->callback([a, &out] {
    if (!(a->session.end > a->session.start)) fail_validation("session end must follow its start");
    auto days = split_by_date(read_quote_csv(a->input));
    make_dir(a->out_dir);
    std::string csv =
        "date,accepted,out_of_session,other_venue,crossed,rounded,changes,unit_events,first_mid,last_mid,"
        "min_tick_pct\n";
    for (auto& [date, quotes] : days) {
      auto res = mid_price_events(quotes, a->session, a->tick);
      write_event_csv((fs::path(a->out_dir) / ("events_" + date + ".csv")).string(), res.stream);
      const auto& d = res.diagnostics;
      const double pct = d.changes > 0 ? minimal_tick_stats(quotes, a->session, a->tick) : std::nan("");
      csv += join({date, std::to_string(d.accepted), std::to_string(d.out_of_session), std::to_string(d.other_venue),
                   std::to_string(d.crossed), std::to_string(d.rounded), std::to_string(d.changes),
                   std::to_string(d.unit_events), num(d.first_mid), num(d.last_mid), num(pct)});
    }
    emit(csv, a->out, out);
  });
}

struct IntradayArgs {
  std::string input, init, out, trend;
  double window = 600.0, tick = 0.025, s0 = 100.0;
};

void add_intraday(CLI::App& app, std::ostream& out) {
  auto a = std::make_shared<IntradayArgs>();
  auto* c = app.add_subcommand("intraday", "Volatility estimates on growing intraday prefixes");
  c->add_option("input", a->input, "Event stream CSV")->required();
  c->add_option("--window", a->window, "Prefix increment in seconds")->capture_default_str();
  c->add_option("--init", a->init, "Initial symmetric parameter file; default is a moment-based guess");
  c->add_option("--tick", a->tick, "Tick size used for sigma_ann")->capture_default_str();
  c->add_option("--s0", a->s0, "Reference price used for sigma_ann")->capture_default_str();
  c->add_option("--trend", a->trend, "Write the slope test of the series to this CSV");
  c->add_option("--out", a->out, "Output CSV (default stdout)");
  c->callback([a, &out] {
    auto s = read_event_csv(a->input);
    auto init = a->init.empty() ? default_initial_guess(s) : symmetric_from_kv(KvMap::read_file(a->init));
    init.tick = a->tick;
    init.s0 = a->s0;
    auto pts = intraday_vol(s, init, a->window);
    std::string csv = "horizon,sigma_ann,std_error,converged\n";
    std::vector<double> sig;
    for (auto& p : pts) {
      csv += join({num(p.horizon), num(p.sigma_ann), num(p.std_error), p.converged ? "1" : "0"});
      sig.push_back(p.sigma_ann);
    }
    emit(csv, a->out, out);
    if (!a->trend.empty()) {
      auto t = cumulative_trend_test(sig);
      emit("slope,t_stat,p_value,n\n" + join({num(t.slope), num(t.t_stat), num(t.p_value), std::to_string(t.n)}),
           a->trend, out);
    }
  });
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Io: return "io";
  }
  return "error";
}

}  // namespace

std::unique_ptr<CLI::App> build_app(std::ostream& out) {
  auto app = std::make_unique<CLI::App>("Hawkes and diffusion models of tick-level prices", "hawkesvol");
  app->require_subcommand(1);
  app->add_option_function<std::size_t>(
         "--threads", [](std::size_t n) { set_thread_count(n); },
         "Worker threads (default: HAWKESVOL_THREADS or hardware concurrency)")
      ->check(CLI::PositiveNumber);
  add_simulate(*app, out);
  add_fit(*app, out);
  add_vol(*app, out);
  add_moments(*app, out);
  add_tsrv(*app, out);
  add_sigplot(*app, out);
  add_diff_sim(*app, out);
  add_diff_fit(*app, out);
  add_rho_est(*app, out);
  add_density(*app, out);
  add_ingest(*app, out);
  add_intraday(*app, out);
  return app;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  set_thread_count(0);
  auto app = build_app(out);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: validation: " << one_line(e.what()) << "\n";
    return exit_code(ErrorKind::Validation);
  } catch (const Error& e) {
    err << "error: " << kind_name(e.kind()) << ": " << one_line(e.what()) << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace hawkesvol::cli
