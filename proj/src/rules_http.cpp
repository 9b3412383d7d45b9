// Copyright 2026 The nsplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdlib>

#include "httplib.h"
#include "nsplan/rules.hpp"
#include "nsplan/text.hpp"

namespace nsplan::rules
{

HttpGenerator::HttpGenerator(std::string url, double timeout_s)
: url_(std::move(url)), timeout_s_(timeout_s)
{
  // Accepted form: http://host[:port][/path]
  const std::string prefix = "http://";
  if (url_.rfind(prefix, 0) != 0) {
    throw ConfigError("http generator url must start with http://, got " + url_);
  }
  std::string rest = url_.substr(prefix.size());
  const std::size_t slash = rest.find('/');
  std::string authority = (slash == std::string::npos) ? rest : rest.substr(0, slash);
  path_ = (slash == std::string::npos) ? "/" : rest.substr(slash);
  const std::size_t colon = authority.find(':');
  if (colon == std::string::npos) {
    host_ = authority;
    port_ = 80;
  } else {
    host_ = authority.substr(0, colon);
    char * end = nullptr;
    const long p = std::strtol(authority.c_str() + colon + 1, &end, 10);
    if (end == authority.c_str() + colon + 1 || *end != '\0' || p <= 0 || p > 65535) {
      throw ConfigError("http generator url has a bad port: " + url_);
    }
    port_ = static_cast<int>(p);
  }
  if (host_.empty()) {
    throw ConfigError("http generator url has no host: " + url_);
  }
}

std::vector<Suggestion> HttpGenerator::generate(const SceneFacts & facts)
{
  notes_.clear();
  httplib::Client client(host_, port_);
  const auto timeout =
    std::chrono::milliseconds(static_cast<long long>(timeout_s_ * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers{
    {"X-Nsplan-Frame", facts.frame_id},
    {"X-Nsplan-Nav", std::string(to_string(facts.ego.nav))},
  };
  const std::string body = text::serialize_facts(facts);
  auto res = client.Post(path_, headers, body, "text/plain");
  if (!res) {
    throw GeneratorFailure("http generator: no response from " + url_);
  }
  if (res->status != 200) {
    throw GeneratorFailure(
      "http generator: status " + std::to_string(res->status) + " from " + url_);
  }
  auto parsed = text::parse_suggestions_lenient(res->body, name());
  return sanitize_generated(std::move(parsed.accepted), parsed.rejected, notes_);
}

}  // namespace nsplan::rules
