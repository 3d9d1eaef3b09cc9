#include "coc/service.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "coc/error.hpp"

namespace coc {

namespace {

nlohmann::json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(body);
    if (!j.is_object()) throw SchemaError("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(fmt::format("malformed JSON: {}", e.what()));
  }
}

void allow_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError(fmt::format("unknown field '{}'", key));
    }
  }
}

std::optional<std::size_t> revision_of(const nlohmann::json& j) {
  if (!j.contains("revision") || j.at("revision").is_null()) return std::nullopt;
  return j.at("revision").get<std::size_t>();
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

const Dataset& loaded(const SessionState& state) {
  if (!state.dataset) throw NotFoundError("no dataset loaded");
  return *state.dataset;
}

nlohmann::json error_body(const std::string& message, const std::string& hint = {}) {
  nlohmann::json j = {{"error", message}};
  if (!hint.empty()) j["hint"] = hint;
  return j;
}

OrderStrategy strategy_named(const std::string& name) {
  if (name == "importance") return OrderStrategy::importance;
  if (name == "hamiltonian") return OrderStrategy::hamiltonian;
  if (name == "manual") return OrderStrategy::manual;
  throw DataError(fmt::format("unknown ordering strategy '{}'", name));
}

AxisSet patch_axes(const AxisSet& axes, const nlohmann::json& patches) {
  auto configs = axes.axes();
  for (const auto& patch : patches) {
    if (!patch.is_object()) throw SchemaError("axis patch must be an object");
    allow_keys(patch, {"attr", "rotation", "rotate_by", "direction", "radius", "span"});
    const auto attr = patch.at("attr").get<std::size_t>();
    const auto it = std::find_if(configs.begin(), configs.end(), [&](const AxisConfig& a) { return a.attr == attr; });
    if (it == configs.end()) throw NotFoundError(fmt::format("no axis for attribute {}", attr));
    if (patch.contains("rotation")) it->rotation = patch.at("rotation").get<double>();
    if (patch.contains("rotate_by")) it->rotation += patch.at("rotate_by").get<double>();
    if (patch.contains("direction")) it->direction = patch.at("direction").get<int>();
    if (patch.contains("radius")) it->radius = patch.at("radius").get<double>();
    if (patch.contains("span")) it->span = patch.at("span").get<double>();
  }
  return AxisSet(std::move(configs), axes.mapping());
}

}  // namespace

ApiResponse Api::handle(const std::string& method, const std::string& path, const std::string& body,
                        const std::string& content_type) const {
  ApiResponse response;
  try {
    auto j = route(method, path, body, content_type, response);
    if (!j.is_null()) response.body = j.dump();
  } catch (const StaleRevisionError& e) {
    response.status = 409;
    auto j = error_body(e.what(), "refetch the geometry and replay the edit");
    j["current_revision"] = e.current();
    response.body = j.dump();
  } catch (const SchemaError& e) {
    response.status = 400;
    response.body = error_body(e.what()).dump();
  } catch (const nlohmann::json::exception& e) {
    response.status = 400;
    response.body = error_body(fmt::format("malformed request: {}", e.what())).dump();
  } catch (const NotFoundError& e) {
    response.status = 404;
    response.body = error_body(e.what()).dump();
  } catch (const DomainError& e) {
    response.status = 422;
    response.body = error_body(e.what(), e.hint()).dump();
  } catch (const DataError& e) {
    response.status = 422;
    response.body = error_body(e.what()).dump();
  } catch (const std::exception& e) {
    response.status = 500;
    response.body = error_body(e.what()).dump();
  }
  if (response.status != 200) response.content_type = "application/json";
  return response;
}

nlohmann::json Api::route(const std::string& method, const std::string& path, const std::string& body,
                          const std::string& content_type, ApiResponse& raw) const {
  const bool get = method == "GET";
  const bool post = method == "POST";
  auto wrong_method = [&]() -> nlohmann::json {
    raw.status = 405;
    return error_body(fmt::format("{} not allowed on {}", method, path));
  };

  if (path == "/api/dataset") {
    if (get) {
      return session_.read([](const SessionState& s) {
        return nlohmann::json{{"revision", s.revision}, {"dataset", to_json(loaded(s))}};
      });
    }
    if (!post) return wrong_method();
    std::string csv;
    LabelColumn label = kLastColumn;
    CsvOptions options;
    std::optional<std::size_t> expected;
    if (content_type.rfind("text/csv", 0) == 0) {
      csv = body;
    } else {
      const auto j = parse_body(body);
      allow_keys(j, {"csv", "label_column", "drop_missing", "revision"});
      csv = j.at("csv").get<std::string>();
      if (j.contains("label_column")) {
        const auto& l = j.at("label_column");
        label = l.is_string() ? LabelColumn{l.get<std::string>()} : LabelColumn{l.get<std::size_t>()};
      }
      options.drop_missing = j.value("drop_missing", false);
      expected = revision_of(j);
    }
    auto dataset = parse_csv(csv, label, options);
    return session_.mutate(expected, [&](SessionState& s) {
      s.dataset = std::move(dataset);
      Session::reset_view(s);
      nlohmann::json classes = nlohmann::json::array();
      for (const auto& c : s.dataset->classes()) classes.push_back(c.name);
      return nlohmann::json{{"cases", s.dataset->size()}, {"attributes", s.dataset->dimension()}, {"classes", classes}};
    });
  }

  if (path == "/api/axes") {
    if (get) {
      return session_.read([](const SessionState& s) {
        return nlohmann::json{{"revision", s.revision}, {"axes", to_json(s.axes)}, {"layout", to_json(s.layout)}};
      });
    }
    if (!post) return wrong_method();
    const auto j = parse_body(body);
    allow_keys(j, {"revision", "axes", "patches", "order", "strategy", "spans", "closed", "layout"});
    return session_.mutate(revision_of(j), [&](SessionState& s) {
      const auto& dataset = loaded(s);
      bool reordered = false;
      if (j.contains("axes")) {
        s.axes = axes_from_json(j.at("axes"));
        reordered = true;
      }
      if (j.contains("order")) {
        const auto order = j.at("order").get<std::vector<std::size_t>>();
        s.axes = reorder_axes(s.axes, order);
        reordered = true;
      } else if (j.contains("strategy")) {
        s.axes = reorder_axes(s.axes, strategy_named(j.at("strategy").get<std::string>()), dataset);
        reordered = true;
      }
      if (j.contains("patches")) s.axes = patch_axes(s.axes, j.at("patches"));
      if (j.contains("spans")) s.axes = scale_spans(s.axes, j.at("spans").get<std::vector<double>>());
      if (j.contains("layout")) s.layout = layout_from_json(j.at("layout"));
      if (j.contains("closed")) s.layout.closed = j.at("closed").get<bool>();
      for (const auto& a : s.axes.axes()) {
        if (a.attr >= dataset.dimension()) throw DataError(fmt::format("axis refers to missing attribute {}", a.attr));
      }
      if (reordered) {
        s.reduction.reset();
        s.envelopes.reset();
      }
      return nlohmann::json{{"axes", to_json(s.axes)}, {"layout", to_json(s.layout)}};
    });
  }

  if (path == "/api/straighten") {
    if (!post) return wrong_method();
    const auto j = parse_body(body);
    allow_keys(j, {"revision", "case", "mean", "method", "theta", "r1"});
    StraightenRequest request;
    request.case_id = optional_field<std::size_t>(j, "case");
    request.mean_of = optional_field<std::string>(j, "mean");
    request.method = j.value("method", std::string("rotation"));
    request.theta = j.value("theta", 0.0);
    request.first_radius = optional_field<double>(j, "r1");
    return session_.mutate(revision_of(j), [&](SessionState& s) { return apply_straighten(s, request); });
  }

  if (path.rfind("/api/classify/", 0) == 0) {
    if (!post) return wrong_method();
    const auto kind = path.substr(std::string("/api/classify/").size());
    auto j = parse_body(body);
    const auto expected = revision_of(j);
    if (kind == "knn") {
      allow_keys(j, {"revision", "k", "folds", "seed", "case"});
      const auto k = j.value("k", std::size_t{3});
      const auto folds = j.value("folds", std::size_t{10});
      const auto seed = j.value("seed", std::uint64_t{0});
      const auto query = optional_field<std::size_t>(j, "case");
      return session_.mutate(expected, [&](SessionState& s) {
        auto report = knn_report(loaded(s), k, folds, seed, query);
        if (query) {
          s.overlay = NeighborOverlay{*query, {k}, {report["query"]["neighbors"].get<std::vector<std::size_t>>()}};
        }
        s.models["knn"] = report;
        report["model_id"] = "knn";
        return report;
      });
    }
    if (kind == "knne") {
      allow_keys(j, {"revision", "K", "folds", "seed", "case"});
      KnneConfig config;
      config.max_k = j.value("K", config.max_k);
      config.folds = j.value("folds", config.folds);
      config.seed = j.value("seed", config.seed);
      const auto query = optional_field<std::size_t>(j, "case");
      return session_.mutate(expected, [&](SessionState& s) {
        auto report = knne_report(loaded(s), config, query);
        if (query) {
          NeighborOverlay overlay{*query, {}, {}};
          for (const auto& entry : report["query"]["neighbors"]) {
            overlay.ks.push_back(entry["k"].get<std::size_t>());
            overlay.neighbors.push_back(entry["ids"].get<std::vector<std::size_t>>());
          }
          s.overlay = std::move(overlay);
        }
        s.models["knne"] = report;
        report["model_id"] = "knne";
        return report;
      });
    }
    if (kind == "sac" || kind == "linear" || kind == "gic") {
      if (kind != "gic" && j.contains("kinds")) throw SchemaError(fmt::format("'kinds' is only accepted by gic"));
      GICConfig config;
      if (kind == "gic") {
        config = gic_config_from_json(j, ClassifierKind::sac);
        if (!j.contains("kinds")) config.kinds = {ClassifierKind::sac, ClassifierKind::linear};
      } else {
        config = gic_config_from_json(j, classifier_kind(kind));
      }
      return session_.mutate(expected, [&](SessionState& s) {
        auto report = iter_report(loaded(s), config);
        s.models[kind] = report;
        report["model_id"] = kind;
        return report;
      });
    }
    throw NotFoundError(fmt::format("unknown classifier '{}'", kind));
  }

  if (path.rfind("/api/models/", 0) == 0) {
    if (!get) return wrong_method();
    const auto id = path.substr(std::string("/api/models/").size());
    return session_.read([&](const SessionState& s) {
      const auto it = s.models.find(id);
      if (it == s.models.end()) throw NotFoundError(fmt::format("unknown model '{}'", id));
      return it->second;
    });
  }

  if (path == "/api/or-reduce") {
    if (!post) return wrong_method();
    const auto j = parse_body(body);
    allow_keys(j, {"revision", "bins", "tau", "envelopes", "clear"});
    const auto bins = j.value("bins", std::size_t{100});
    const auto tau = optional_field<std::size_t>(j, "tau");
    const bool envelopes = j.value("envelopes", false);
    const bool clear = j.value("clear", false);
    return session_.mutate(revision_of(j), [&](SessionState& s) {
      if (clear) {
        loaded(s);
        s.reduction.reset();
        s.envelopes.reset();
        return nlohmann::json{{"cleared", true}};
      }
      return apply_or_reduce(s, bins, tau, envelopes);
    });
  }

  if (path == "/api/geometry") {
    if (!get) return wrong_method();
    return session_.read([](const SessionState& s) { return Session::geometry_json(s); });
  }

  if (path == "/api/svg") {
    if (!get) return wrong_method();
    raw.content_type = "image/svg+xml";
    raw.body = session_.read([](const SessionState& s) {
      const auto doc = Session::document(s);
      return render_svg(doc, s.style, Viewport::fit(doc));
    });
    return nullptr;
  }

  throw NotFoundError(fmt::format("no endpoint {}", path));
}

ApiServer::ApiServer(Session& session) : api_(session), server_(std::make_unique<httplib::Server>()) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = api_.handle(req.method, req.path, req.body, req.get_header_value("Content-Type"));
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body, out.content_type);
  };
  server_->Get(R"(/api/.*)", dispatch);
  server_->Post(R"(/api/.*)", dispatch);
  server_->Put(R"(/api/.*)", dispatch);
  server_->Delete(R"(/api/.*)", dispatch);
  server_->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error(fmt::format("cannot bind {}", host));
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
  return port;
}

void ApiServer::listen() { server_->listen_after_bind(); }

void ApiServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void ApiServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

int port_from_env() {
  const char* value = std::getenv("COC_PORT");
  if (value == nullptr || *value == '\0') return 8080;
  try {
    const int port = std::stoi(value);
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    return port;
  } catch (const std::exception&) {
    throw DataError(fmt::format("COC_PORT '{}' is not a valid port", value));
  }
}

}  // namespace coc
