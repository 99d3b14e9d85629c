#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ndswarm/session.hpp"

namespace ndswarm {

struct ApiRequest {
  std::string method;  // "GET", "POST", ...
  std::string target;  // path plus optional query
  std::string body;
  std::string content_type;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-free JSON router.
//
//   GET  /health
//   GET  /datasets                     list
//   POST /datasets                     CSV body (?label_column=&delimiter=&missing=)
//                                      or JSON {"path", "label_column"}
//   GET  /datasets/{id}                per-dimension summary
//   POST /sessions                     {"dataset": id}
//   GET  /sessions/{id}                state summary
//   POST /sessions/{id}/command        one command object
//   GET  /sessions/{id}/frame
//   GET  /sessions/{id}/pca-report     (?scope=&standardize_inputs=)
//
// Errors come back as {"error": message, ...details}.
class Api {
 public:
  explicit Api(std::shared_ptr<SessionRegistry> registry);

  ApiResponse handle(const ApiRequest& request);
  const std::shared_ptr<SessionRegistry>& registry() const { return registry_; }

  // "/sessions/{id}/stream" -> id.
  static std::optional<std::string> stream_session(std::string_view target);

 private:
  ApiResponse route(const ApiRequest& request);

  std::shared_ptr<SessionRegistry> registry_;
};

// Splits "a=1&b=x%20y" into decoded pairs. Later keys win.
std::map<std::string, std::string> parse_query(std::string_view query);
std::string percent_decode(std::string_view text);

}  // namespace ndswarm
