#include "ndswarm/api.hpp"

#include <charconv>
#include <vector>

namespace ndswarm {

namespace {

ApiResponse json_response(int status, const nlohmann::json& j) {
  return {status, j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), "application/json"};
}

ApiResponse error_response(int status, const std::string& message, const nlohmann::json& details = nullptr) {
  nlohmann::json j = {{"error", message}};
  if (details.is_object()) j.update(details);
  return json_response(status, j);
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > start) parts.push_back(path.substr(start, end - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return parts;
}

nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError(ServiceError::Code::BadRequest, std::string("malformed JSON: ") + e.what());
  }
}

nlohmann::json dataset_json(const std::string& id, const Dataset& ds) {
  return {{"dataset", id},
          {"source", ds.source()},
          {"n_dims", ds.dims()},
          {"n_points", ds.points()},
          {"dimensions", ds.names()},
          {"labelled", ds.labels().has_value()}};
}

ApiResponse result_response(const DispatchResult& result) {
  if (const auto* frame = std::get_if<SceneFrame>(&result.value)) {
    return {200, serialize_frame(*frame), "application/json"};
  }
  if (const auto* report = std::get_if<PcaReport>(&result.value)) {
    return json_response(200, pca_report_to_json(*report));
  }
  return json_response(200, std::get<nlohmann::json>(result.value));
}

CsvOptions csv_options(const std::map<std::string, std::string>& query) {
  CsvOptions opts;
  if (auto it = query.find("label_column"); it != query.end() && !it->second.empty()) {
    opts.label_column = it->second;
  }
  if (auto it = query.find("delimiter"); it != query.end()) {
    const std::string& d = it->second;
    if (d == "tab" || d == "\\t") {
      opts.delimiter = '\t';
    } else if (d.size() == 1) {
      opts.delimiter = d[0];
    } else {
      throw ServiceError(ServiceError::Code::BadRequest, "delimiter must be a single character");
    }
  }
  if (auto it = query.find("missing"); it != query.end()) {
    try {
      opts.missing_policy = parse_missing_policy(it->second);
    } catch (const std::exception& e) {
      throw ServiceError(ServiceError::Code::BadRequest, e.what());
    }
  }
  return opts;
}

}  // namespace

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '+') {
      out += ' ';
    } else if (text[i] == '%' && i + 2 < text.size()) {
      unsigned value = 0;
      const auto* first = text.data() + i + 1;
      const auto [ptr, ec] = std::from_chars(first, first + 2, value, 16);
      if (ec == std::errc() && ptr == first + 2) {
        out += static_cast<char>(value);
        i += 2;
      } else {
        out += '%';
      }
    } else {
      out += text[i];
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    const auto amp = query.find('&');
    const auto pair = query.substr(0, amp);
    if (!pair.empty()) {
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos) {
        out[percent_decode(pair)] = "";
      } else {
        out[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
      }
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return out;
}

Api::Api(std::shared_ptr<SessionRegistry> registry) : registry_(std::move(registry)) {}

std::optional<std::string> Api::stream_session(std::string_view target) {
  const auto path = target.substr(0, target.find('?'));
  const auto parts = split_path(path);
  if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream") return std::string(parts[1]);
  return std::nullopt;
}

ApiResponse Api::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const ServiceError& e) {
    return error_response(e.status(), e.what(), e.details());
  } catch (const DatasetError& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ApiResponse Api::route(const ApiRequest& req) {
  const std::string_view target = req.target;
  const auto qpos = target.find('?');
  const auto parts = split_path(target.substr(0, qpos));
  const auto query = qpos == std::string_view::npos ? std::map<std::string, std::string>{}
                                                    : parse_query(target.substr(qpos + 1));
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  const auto method_not_allowed = [] { return error_response(405, "method not allowed"); };
  auto& store = *registry_->store();

  if (parts.size() == 1 && parts[0] == "health") {
    return get ? json_response(200, {{"ok", true}}) : method_not_allowed();
  }

  if (!parts.empty() && parts[0] == "datasets") {
    if (parts.size() == 1 && get) {
      auto list = nlohmann::json::array();
      for (const auto& id : store.ids()) list.push_back(dataset_json(id, *store.get(id)));
      return json_response(200, {{"datasets", list}});
    }
    if (parts.size() == 1 && post) {
      std::string id;
      if (req.content_type.rfind("application/json", 0) == 0) {
        const auto body = parse_body(req.body);
        if (!body.contains("path") || !body["path"].is_string()) {
          throw ServiceError(ServiceError::Code::BadRequest, "JSON upload needs a 'path'");
        }
        auto opts = csv_options(query);
        if (body.contains("label_column") && body["label_column"].is_string()) {
          opts.label_column = body["label_column"].get<std::string>();
        }
        id = store.load(body["path"].get<std::string>(), opts);
      } else {
        id = store.add(parse_csv(std::string_view(req.body), csv_options(query), "upload"));
      }
      return json_response(201, dataset_json(id, *store.get(id)));
    }
    if (parts.size() == 2 && get) {
      const std::string id(parts[1]);
      const auto ds = store.get(id);
      auto j = dataset_json(id, *ds);
      auto dims = nlohmann::json::array();
      for (const auto& s : summarize(*ds)) {
        dims.push_back({{"name", s.name},
                        {"min", s.min},
                        {"max", s.max},
                        {"mean", s.mean},
                        {"stddev", s.stddev},
                        {"distinct", s.distinct}});
      }
      j["summary"] = dims;
      return json_response(200, j);
    }
    return parts.size() <= 2 ? method_not_allowed() : error_response(404, "no such route");
  }

  if (!parts.empty() && parts[0] == "sessions") {
    if (parts.size() == 1) {
      if (!post) return method_not_allowed();
      const auto body = parse_body(req.body);
      if (!body.contains("dataset") || !body["dataset"].is_string()) {
        throw ServiceError(ServiceError::Code::BadRequest, "session needs a 'dataset' id");
      }
      const auto session = registry_->create(body["dataset"].get<std::string>());
      return json_response(201, session->summary());
    }
    const auto session = registry_->get(std::string(parts[1]));
    if (parts.size() == 2) return get ? json_response(200, session->summary()) : method_not_allowed();
    if (parts.size() == 3 && parts[2] == "command") {
      if (!post) return method_not_allowed();
      return result_response(session->dispatch(command_from_json(parse_body(req.body))));
    }
    if (parts.size() == 3 && parts[2] == "frame") {
      if (!get) return method_not_allowed();
      return result_response(session->dispatch(cmd::RequestFrame{}));
    }
    if (parts.size() == 3 && parts[2] == "pca-report") {
      if (!get) return method_not_allowed();
      nlohmann::json j = {{"type", "get_pca_report"}};
      if (auto it = query.find("scope"); it != query.end()) j["scope"] = it->second;
      if (auto it = query.find("standardize_inputs"); it != query.end()) {
        if (it->second != "true" && it->second != "false") {
          throw ServiceError(ServiceError::Code::BadRequest, "standardize_inputs must be true or false");
        }
        j["standardize_inputs"] = it->second == "true";
      }
      return result_response(session->dispatch(command_from_json(j)));
    }
    if (parts.size() == 3 && parts[2] == "stream") {
      return error_response(426, "stream requires a WebSocket upgrade");
    }
  }
  return error_response(404, "no such route");
}

}  // namespace ndswarm
