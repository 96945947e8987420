// Copyright 2026 The hilsort Authors.
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

// HTTP/JSON front end over SessionStore.
//
//   GET  /healthz
//   GET  /v1/sessions                                list ids
//   POST /v1/sessions                                create
//   POST /v1/sessions/import                         resume an export
//   GET  /v1/sessions/{id}/next                      pending pair or done
//   POST /v1/sessions/{id}/judgments                 {request_id, outcome}
//   GET  /v1/sessions/{id}/ranking
//   GET  /v1/sessions/{id}/stats
//   GET  /v1/sessions/{id}/export
//   GET  /v1/sessions/{id}/items/{item_id}/image
//
// Errors are {"code", "message", "details"}.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hilsort/error.hpp"
#include "hilsort/store.hpp"
#include "httplib.h"
#include "json.hpp"

namespace hilsort {

struct ServiceOptions {
  // "*" allows any origin.
  std::vector<std::string> cors_origins;
  std::filesystem::path image_root = ".";
  // Optional directory of static UI assets mounted at /ui.
  std::filesystem::path static_dir;
};

inline std::string image_content_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> kTypes = {
      {".png", "image/png"},   {".jpg", "image/jpeg"}, {".jpeg", "image/jpeg"},
      {".gif", "image/gif"},   {".webp", "image/webp"}, {".bmp", "image/bmp"},
      {".svg", "image/svg+xml"}};
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto it = kTypes.find(ext);
  return it == kTypes.end() ? "application/octet-stream" : it->second;
}

class HttpService {
 public:
  HttpService(SessionStore& store, ServiceOptions options)
      : store_(store), options_(std::move(options)) {}

  void Register(httplib::Server& server) {
    server.set_post_routing_handler(
        [this](const httplib::Request& req, httplib::Response& res) {
          ApplyCors(req, res);
        });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      Reply(res, 200, {{"status", "ok"}});
    });

    server.Get("/v1/sessions", Wrap([this](const httplib::Request&,
                                           httplib::Response& res) {
      Reply(res, 200, {{"sessions", store_.List()}});
    }));

    server.Post("/v1/sessions", Wrap([this](const httplib::Request& req,
                                            httplib::Response& res) {
      const json body = ParseBody(req);
      if (!body.contains("items"))
        throw InputError("missing field", {"items"});
      if (!body.contains("similarities"))
        throw InputError("missing field", {"similarities"});
      auto items = items_from_json(body["items"]);
      const auto& sims_field = body["similarities"];
      auto sims = sims_field.is_string()
                      ? parse_similarities(sims_field.get<std::string>())
                      : parse_similarities(sims_field);
      auto config = session_config_from_json(body.value("config", json(nullptr)));
      std::optional<std::string> id;
      if (body.contains("session_id")) id = body["session_id"].get<std::string>();
      const std::string sid = store_.Create(items, sims, config, id);
      Reply(res, 201, {{"session_id", sid}, {"stats", store_.Stats(sid)}});
    }));

    server.Post("/v1/sessions/import", Wrap([this](const httplib::Request& req,
                                                   httplib::Response& res) {
      const std::string sid = store_.Import(ParseBody(req));
      Reply(res, 201, {{"session_id", sid}, {"stats", store_.Stats(sid)}});
    }));

    server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/next)",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 Reply(res, 200, store_.Next(req.matches[1]));
               }));

    server.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/judgments)",
                Wrap([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = ParseBody(req);
                  if (!body.contains("request_id") ||
                      !body["request_id"].is_number_integer())
                    throw InputError("request_id must be an integer",
                                     {"request_id"});
                  if (!body.contains("outcome") || !body["outcome"].is_string())
                    throw InputError("outcome must be a string", {"outcome"});
                  Reply(res, 200,
                        store_.PostJudgment(
                            req.matches[1], body["request_id"].get<std::int64_t>(),
                            parse_outcome(body["outcome"].get<std::string>())));
                }));

    server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/ranking)",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 Reply(res, 200, store_.Ranking(req.matches[1]));
               }));

    server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/stats)",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 Reply(res, 200, store_.Stats(req.matches[1]));
               }));

    server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/export)",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 Reply(res, 200, store_.Export(req.matches[1]));
               }));

    server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/items/([^/]+)/image)",
               Wrap([this](const httplib::Request& req, httplib::Response& res) {
                 ServeImage(req.matches[1], req.matches[2], res);
               }));

    if (!options_.static_dir.empty())
      server.set_mount_point("/ui", options_.static_dir.string());
  }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void Reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void ReplyError(httplib::Response& res, int status,
                         const std::string& code, const std::string& message,
                         const std::vector<std::string>& details = {}) {
    Reply(res, status, {{"code", code}, {"message", message}, {"details", details}});
  }

  static json ParseBody(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object())
      throw InputError("request body must be a JSON object");
    return body;
  }

  static Handler Wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const InputError& e) {
        ReplyError(res, 400, "invalid_input", e.what(), e.details());
      } catch (const NotFoundError& e) {
        ReplyError(res, 404, "not_found", e.what());
      } catch (const ConflictError& e) {
        ReplyError(res, 409, "conflict", e.what());
      } catch (const StateError& e) {
        ReplyError(res, 409, "invalid_state", e.what());
      } catch (const json::exception& e) {
        ReplyError(res, 400, "invalid_input", e.what());
      } catch (const std::exception& e) {
        ReplyError(res, 500, "internal", e.what());
      }
    };
  }

  void ApplyCors(const httplib::Request& req, httplib::Response& res) const {
    const std::string origin = req.get_header_value("Origin");
    if (origin.empty()) return;
    for (const auto& allowed : options_.cors_origins) {
      if (allowed == "*" || allowed == origin) {
        res.set_header("Access-Control-Allow-Origin", allowed == "*" ? "*" : origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Vary", "Origin");
        return;
      }
    }
  }

  // URLs redirect; anything else must resolve to a file under image_root.
  void ServeImage(const std::string& sid, const std::string& item_id,
                  httplib::Response& res) {
    const std::string ref = store_.DisplayRef(sid, item_id);
    if (ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0) {
      res.set_redirect(ref);
      return;
    }
    namespace fs = std::filesystem;
    const fs::path root = fs::weakly_canonical(options_.image_root);
    const fs::path path = fs::weakly_canonical(root / ref);
    const auto rel = path.lexically_relative(root);
    if (ref.empty() || rel.empty() || *rel.begin() == "..")
      throw NotFoundError("image for '" + item_id + "' is outside the image root");
    if (!fs::is_regular_file(path))
      throw NotFoundError("image for '" + item_id + "' not found");
    res.status = 200;
    res.set_content(read_file(path), image_content_type(path));
  }

  SessionStore& store_;
  ServiceOptions options_;
};

}  // namespace hilsort
