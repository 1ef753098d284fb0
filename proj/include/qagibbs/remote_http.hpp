#pragma once

// HTTP transport for RemoteBackend live/record modes. Kept out of
// backends.hpp so that only programs that talk to a server pull in httplib.
//
//   QAGIBBS_REMOTE_URL    e.g. http://localhost:8080/sample
//   QAGIBBS_REMOTE_TOKEN  sent as "Authorization: Bearer <token>" when set

#include <cstdlib>
#include <memory>
#include <string>

#include "httplib.h"

#include "qagibbs/backends.hpp"
#include "qagibbs/errors.hpp"

namespace qagibbs {

struct HttpEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path = "/";
};

inline HttpEndpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidArgument("remote URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline Transport http_transport(const std::string& url, const std::string& token = {}) {
  const auto endpoint = split_url(url);
  auto client = std::make_shared<httplib::Client>(endpoint.base);
  client->set_read_timeout(300, 0);
  if (!token.empty()) client->set_bearer_token_auth(token);
  return [client, endpoint](const std::string& body) {
    auto res = client->Post(endpoint.path, body, "application/json");
    if (!res) throw TransportError("remote: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("remote: HTTP " + std::to_string(res->status));
    return res->body;
  };
}

inline Transport http_transport_from_env() {
  const char* url = std::getenv("QAGIBBS_REMOTE_URL");
  if (url == nullptr || *url == '\0') throw TransportError("QAGIBBS_REMOTE_URL is not set");
  const char* token = std::getenv("QAGIBBS_REMOTE_TOKEN");
  return http_transport(url, token ? token : "");
}

}  // namespace qagibbs
