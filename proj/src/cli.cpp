#include "coc/cli.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "coc/error.hpp"
#include "coc/service.hpp"
#include "coc/session.hpp"

namespace coc {

namespace {

struct InputOptions {
  std::string path;
  std::string label;
  std::optional<std::size_t> label_index;
  bool drop_missing = false;
};

struct Common {
  InputOptions input;
  std::uint64_t seed = 0;
  bool json = false;
  std::string config;
  std::string out;
};

void add_input(CLI::App* sub, Common& c, bool required = true) {
  sub->add_option("csv", c.input.path, "CSV file with a header row")->required(required);
  sub->add_option("--label", c.input.label, "Label column name (default: last column)");
  sub->add_option("--label-index", c.input.label_index, "Label column index");
  sub->add_flag("--drop-missing", c.input.drop_missing, "Drop rows with missing cells");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_flag("--json", c.json, "Print JSON instead of text");
}

Dataset load(const InputOptions& in) {
  LabelColumn label = kLastColumn;
  if (in.label_index) {
    label = *in.label_index;
  } else if (!in.label.empty()) {
    label = in.label;
  }
  return load_csv(in.path, label, CsvOptions{in.drop_missing});
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(fmt::format("cannot write '{}'", path));
  f << text;
}

SessionState initial_state(const Common& c) {
  SessionState state;
  state.dataset = load(c.input);
  Session::reset_view(state);
  if (!c.config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(c.config));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(fmt::format("config: {}", e.what()));
    }
    auto config = plot_config_from_json(j);
    if (config.axes) state.axes = *config.axes;
    state.layout = config.layout;
    state.style = config.style;
  }
  return state;
}

std::string svg_of(const SessionState& state, const DocumentOptions& extra = {}) {
  DocumentOptions options = extra;
  options.highlight = state.highlight;
  options.extra_cases = state.extra_cases;
  if (state.reduction) options.reduction = &*state.reduction;
  if (state.envelopes) options.envelopes = &*state.envelopes;
  const auto doc = make_document(*state.dataset, state.axes, state.layout, options);
  return render_svg(doc, state.style, Viewport::fit(doc));
}

std::string attr_name(const Dataset& d, std::size_t attr) { return d.attributes()[attr].name; }

std::string describe(const Rule& r, const Dataset& d) {
  const auto num = [](double v) { return fmt::format("{:.6g}", v); };
  std::string feature;
  if (r.form == RuleForm::linear) {
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < r.coefficients.size(); ++i) {
      if (r.coefficients[i] != 0.0) terms.push_back(fmt::format("{:.4g}*{}", r.coefficients[i], attr_name(d, i)));
    }
    feature = fmt::format("({})", fmt::join(terms, " + "));
  } else {
    feature = attr_name(d, r.attr);
  }
  std::string cond;
  const bool lo = std::isfinite(r.t1);
  const bool hi = std::isfinite(r.t2);
  if (lo && hi) {
    cond = fmt::format("{} <= {} <= {}", num(r.t1), feature, num(r.t2));
  } else if (lo) {
    cond = fmt::format("{} >= {}", feature, num(r.t1));
  } else if (hi) {
    cond = fmt::format("{} <= {}", feature, num(r.t2));
  } else {
    cond = fmt::format("any {}", feature);
  }
  return fmt::format("R{:<3} iter {:<3} {:<8} if {} then {} ({} cases)", r.id, r.iteration, to_string(r.form), cond,
                     d.classes()[r.label].name, r.support);
}

void print_iter(std::ostream& out, const Dataset& d, const GICConfig& config, bool json) {
  const auto model = gic_run(d, config);
  if (json) {
    out << iter_report(d, config).dump() << '\n';
    return;
  }
  for (const auto& r : model.rules) out << describe(r, d) << '\n';
  const double pct = d.size() == 0 ? 0.0 : 100.0 * static_cast<double>(model.residual.size()) / static_cast<double>(d.size());
  out << fmt::format("rules: {}  iterations: {}  converged: {}\n", model.rules.size(), model.iterations_used,
                     model.converged ? "yes" : "no");
  out << fmt::format("residual overlap: {} of {} cases ({:.2f}%)\n", model.residual.size(), d.size(), pct);
  for (const auto& w : model.warnings) out << "warning: " << w << '\n';
}

struct IterOptions {
  std::vector<double> rho{1.0};
  double min_region = 0.05;
  std::size_t max_iter = 0;
  std::vector<std::string> kinds;
};

void add_iter(CLI::App* sub, IterOptions& o) {
  sub->add_option("--rho", o.rho, "Purity threshold(s), cycled per iteration")->delimiter(',');
  sub->add_option("--min-region", o.min_region, "Minimum region size as a fraction of remaining cases");
  sub->add_option("--max-iter", o.max_iter, "Iteration cap (0 = until convergence)");
}

GICConfig iter_config(const IterOptions& o, std::vector<ClassifierKind> kinds) {
  GICConfig config;
  config.kinds = std::move(kinds);
  config.rho = o.rho;
  config.min_region = o.min_region;
  if (o.max_iter > 0) config.max_iterations = o.max_iter;
  config.validate();
  return config;
}

std::string error_line(const std::string& kind, const std::string& message, const std::string& hint = {}) {
  nlohmann::json j = {{"error", message}, {"kind", kind}};
  if (!hint.empty()) j["hint"] = hint;
  return j.dump();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concentric Coordinates visualization and classification"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  Common c;

  auto* plot = app.add_subcommand("plot", "Render a dataset to SVG");
  add_input(plot, c);
  plot->add_option("--config", c.config, "Layout and style config (JSON)");
  plot->add_option("--out", c.out, "Output SVG (default: stdout)");
  bool hulls = false;
  bool closed = false;
  bool drawlist = false;
  std::optional<std::size_t> frequency_bins;
  std::vector<std::size_t> highlight;
  plot->add_flag("--hulls", hulls, "Draw per-class convex hulls");
  plot->add_flag("--closed", closed, "Close each polyline");
  plot->add_flag("--drawlist", drawlist, "Emit the JSON drawlist instead of SVG");
  plot->add_option("--frequency-bins", frequency_bins, "Style segments by (bin, bin) frequency");
  plot->add_option("--highlight", highlight, "Case ids to highlight")->delimiter(',');

  auto* straighten = app.add_subcommand("straighten", "Straighten one case into a radial line");
  add_input(straighten, c);
  straighten->add_option("--config", c.config, "Layout and style config (JSON)");
  straighten->add_option("--out", c.out, "Write the straightened plot as SVG");
  StraightenRequest sreq;
  straighten->add_option("--case", sreq.case_id, "Case id");
  straighten->add_option("--mean", sreq.mean_of, "Straighten the synthetic mean of this class");
  straighten->add_option("--method", sreq.method, "rotation or radius")->check(CLI::IsMember({"rotation", "radius"}));
  straighten->add_option("--theta", sreq.theta, "Target angle in radians (rotation method)");
  straighten->add_option("--r1", sreq.first_radius, "Innermost radius (radius method)");

  auto* knn = app.add_subcommand("knn", "Cross-validate a k-NN classifier");
  add_input(knn, c);
  std::size_t k = 3;
  std::size_t folds = 10;
  std::optional<std::size_t> query;
  knn->add_option("--k", k, "Neighbors");
  knn->add_option("--folds", folds, "Cross-validation folds");
  knn->add_option("--case", query, "Also report neighbors of this case (left out)");

  auto* knne = app.add_subcommand("knne", "Train the k-NN ensemble");
  add_input(knne, c);
  KnneConfig kc;
  knne->add_option("--K", kc.max_k, "Largest k considered");
  knne->add_option("--folds", kc.folds, "Cross-validation folds");
  knne->add_option("--case", query, "Also report member neighbors of this case (left out)");

  IterOptions io;
  auto* sac = app.add_subcommand("sac", "Iterative single-attribute classifier");
  add_input(sac, c);
  add_iter(sac, io);
  auto* linear = app.add_subcommand("linear", "Iterative linear classifier");
  add_input(linear, c);
  add_iter(linear, io);
  auto* gic = app.add_subcommand("gic", "Generalized iterative classifier");
  add_input(gic, c);
  add_iter(gic, io);
  gic->add_option("--kinds", io.kinds, "Classifier kinds cycled per iteration (default sac,linear)")
      ->delimiter(',')
      ->check(CLI::IsMember({"sac", "linear"}));

  auto* orr = app.add_subcommand("or-reduce", "Occlusion removal");
  add_input(orr, c);
  orr->add_option("--config", c.config, "Layout and style config (JSON)");
  orr->add_option("--out", c.out, "Write the reduced plot as SVG");
  std::size_t bins = 100;
  std::optional<std::size_t> tau;
  bool envelopes = false;
  orr->add_option("--bins", bins, "Bins per axis");
  orr->add_option("--tau", tau, "Minimum node count (default max(2, 1% of class size))");
  orr->add_flag("--envelopes", envelopes, "Also build class envelopes");
  orr->add_flag("--closed", closed, "Count closing segments");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic Gaussian dataset");
  std::size_t per_class = 100;
  std::size_t attributes = 10;
  std::vector<double> means{0.3, 0.7};
  double stddev = 0.1;
  gen->add_option("--per-class", per_class, "Cases per class");
  gen->add_option("--attributes", attributes, "Attributes");
  gen->add_option("--means", means, "Per-class mean, one per class")->delimiter(',');
  gen->add_option("--std", stddev, "Standard deviation");
  gen->add_option("--seed", c.seed, "Random seed");
  gen->add_option("--out", c.out, "Output CSV (default: stdout)");

  auto* serve = app.add_subcommand("serve", "Start the HTTP API");
  add_input(serve, c, false);
  std::string host = "127.0.0.1";
  std::optional<int> port;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (default: COC_PORT or 8080)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", e.what()) << '\n';
    return 1;
  }

  try {
    if (plot->parsed()) {
      auto state = initial_state(c);
      if (closed) state.layout.closed = true;
      state.highlight = highlight;
      DocumentOptions options;
      options.hulls = hulls;
      options.frequency_bins = frequency_bins;
      options.highlight = highlight;
      auto doc = make_document(*state.dataset, state.axes, state.layout, options);
      const auto text = drawlist ? to_json(doc).dump() : render_svg(doc, state.style, Viewport::fit(doc));
      if (c.out.empty()) {
        out << text << '\n';
      } else {
        write_file(c.out, text);
        if (c.json) {
          out << nlohmann::json{{"out", c.out}, {"rings", doc.rings.size()}, {"polylines", doc.polylines.size()}}.dump()
              << '\n';
        } else {
          out << fmt::format("wrote {}: {} rings, {} polylines\n", c.out, doc.rings.size(), doc.polylines.size());
        }
      }
    } else if (straighten->parsed()) {
      auto state = initial_state(c);
      const auto report = apply_straighten(state, sreq);
      if (!c.out.empty()) write_file(c.out, svg_of(state));
      if (c.json) {
        out << report.dump() << '\n';
      } else {
        out << fmt::format("case {} straightened ({}), collinearity residual {:.3g}\n", report["case"].get<std::size_t>(),
                           sreq.method, report["residual"].get<double>());
        for (const auto& a : state.axes.by_position()) {
          out << fmt::format("  {:<24} radius {:.6g}  rotation {:.6g}\n", attr_name(*state.dataset, a.attr), a.radius,
                             a.rotation);
        }
      }
    } else if (knn->parsed()) {
      const auto d = load(c.input);
      const auto report = knn_report(d, k, folds, c.seed, query);
      if (c.json) {
        out << report.dump() << '\n';
      } else {
        const auto& cv = report["cv"];
        out << fmt::format("k-NN k={} folds={} seed={}\n", k, report["folds"].get<std::size_t>(), c.seed);
        std::vector<std::string> accs;
        for (const auto& a : cv["folds"]) accs.push_back(fmt::format("{:.4f}", a.get<double>()));
        out << "fold accuracy: " << fmt::format("{}", fmt::join(accs, " ")) << '\n';
        out << fmt::format("mean {:.4f}  std {:.4f}\n", cv["mean"].get<double>(), cv["std"].get<double>());
        if (query) {
          out << fmt::format("case {}: predicted {}, neighbors {}\n", *query,
                             d.classes()[report["query"]["prediction"].get<std::size_t>()].name,
                             fmt::join(report["query"]["neighbors"].get<std::vector<std::size_t>>(), " "));
        }
      }
    } else if (knne->parsed()) {
      const auto d = load(c.input);
      kc.seed = c.seed;
      const auto report = knne_report(d, kc, query);
      if (c.json) {
        out << report.dump() << '\n';
      } else {
        out << fmt::format("{:>4}  {:>8}  {:>8}  {}\n", "k", "mean", "std", "note");
        for (const auto& row : report["table"]) {
          out << fmt::format("{:>4}  {:8.4f}  {:8.4f}  {}\n", row["k"].get<std::size_t>(), row["mean"].get<double>(),
                             row["std"].get<double>(), row["excluded"].get<bool>() ? "unstable" : "");
        }
        out << fmt::format("members (k): {}\n", fmt::join(report["members"].get<std::vector<std::size_t>>(), " "));
        out << fmt::format("ensemble accuracy: {:.4f}\n", report["accuracy"].get<double>());
        if (query) {
          out << fmt::format("case {}: predicted {}\n", *query,
                             d.classes()[report["query"]["prediction"].get<std::size_t>()].name);
          for (const auto& n : report["query"]["neighbors"]) {
            out << fmt::format("  k={}: {}\n", n["k"].get<std::size_t>(),
                               fmt::join(n["ids"].get<std::vector<std::size_t>>(), " "));
          }
        }
      }
    } else if (sac->parsed()) {
      print_iter(out, load(c.input), iter_config(io, {ClassifierKind::sac}), c.json);
    } else if (linear->parsed()) {
      print_iter(out, load(c.input), iter_config(io, {ClassifierKind::linear}), c.json);
    } else if (gic->parsed()) {
      std::vector<ClassifierKind> kinds;
      for (const auto& name : io.kinds) kinds.push_back(classifier_kind(name));
      if (kinds.empty()) kinds = {ClassifierKind::sac, ClassifierKind::linear};
      print_iter(out, load(c.input), iter_config(io, kinds), c.json);
    } else if (orr->parsed()) {
      auto state = initial_state(c);
      if (closed) state.layout.closed = true;
      const auto report = apply_or_reduce(state, bins, tau, envelopes);
      if (!c.out.empty()) write_file(c.out, svg_of(state));
      if (c.json) {
        out << report.dump() << '\n';
      } else {
        for (const auto& row : report["per_class"]) {
          out << fmt::format("{:<24} segments {:>6} -> {:>6}\n", row["class"].get<std::string>(),
                             row["before"].get<std::size_t>(), row["after"].get<std::size_t>());
        }
        const auto before = report["total_before"].get<std::size_t>();
        const auto after = report["total_after"].get<std::size_t>();
        out << fmt::format("total segments {} -> {} ({:.2f}% removed), {} cases suppressed, {} pure nodes selected\n",
                           before, after, before == 0 ? 0.0 : 100.0 * static_cast<double>(before - after) / before,
                           state.reduction->suppressed_cases.size(), state.reduction->selected.size());
        if (state.envelopes) out << fmt::format("envelopes: {}\n", state.envelopes->size());
      }
    } else if (gen->parsed()) {
      const auto d = gen_synthetic(per_class, attributes, means, stddev, c.seed);
      const auto text = to_csv(d);
      if (c.out.empty()) {
        out << text;
      } else {
        write_file(c.out, text);
      }
    } else if (serve->parsed()) {
      Session session = c.input.path.empty() ? Session() : Session(load(c.input));
      ApiServer server(session);
      const int bound = server.bind(host, port.value_or(port_from_env()));
      out << fmt::format("listening on http://{}:{}\n", host, bound) << std::flush;
      server.listen();
    }
  } catch (const DomainError& e) {
    err << error_line("domain", e.what(), e.hint()) << '\n';
    return 2;
  } catch (const DataError& e) {
    err << error_line("data", e.what()) << '\n';
    return 2;
  } catch (const NotFoundError& e) {
    err << error_line("data", e.what()) << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << error_line("data", e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << error_line("internal", e.what()) << '\n';
    return 3;
  }
  return 0;
}

}  // namespace coc
