// Copyright 2026 The creq Authors.
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

#include "creq/http_api.hpp"

#include <exception>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "creq/annotation.hpp"

namespace creq {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Maps library exceptions onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const ExhaustedError& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const json::exception& e) {
        send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

json parse_body(const httplib::Request& req) {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

std::string field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

}  // namespace

void install_routes(httplib::Server& server, AnnotationService& service) {
    const std::string p = kApiPrefix;

    server.Get(p + "/tasks/next", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_param("annotator")) throw ValidationError("query parameter 'annotator' is required");
            send_json(res, 200, task_to_json(service.next_task(req.get_param_value("annotator"))));
        });
    });

    server.Post(p + "/tasks/defer", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto j = parse_body(req);
            send_json(res, 200, {{"sequence", service.defer(field(j, "annotator"), field(j, "sentence_id"))}});
        });
    });

    server.Post(p + "/labels", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto j = parse_body(req);
            const auto record = label_from_json(j, field(j, "sentence_id"));
            const auto ack = service.submit_label(record);
            send_json(res, 200, {{"sequence", ack.sequence}, {"replaced", ack.replaced}});
        });
    });

    server.Get(p + R"(/sentences/([^/]+)/context)", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, context_to_json(service.context(req.matches[1].str()))); });
    });

    server.Get(p + "/cues", [&service](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            const auto lexicon = service.lexicon();
            const auto usage = service.cue_usage();
            json cues = json::array();
            for (const auto& e : lexicon.entries()) {
                const auto it = usage.find(e.phrase);
                cues.push_back({{"phrase", e.phrase},
                                {"syntactic_type", std::string(to_string(e.syntactic_type))},
                                {"relationship_class", e.relationship_class
                                                           ? json(std::string(to_string(*e.relationship_class)))
                                                           : json(nullptr)},
                                {"usage", it == usage.end() ? 0 : it->second}});
            }
            send_json(res, 200, {{"cues", cues}});
        });
    });

    server.Post(p + "/cues", [&service](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto j = parse_body(req);
            const auto type = parse_syntactic_type(field(j, "syntactic_type"));
            std::optional<Relationship> rel;
            if (j.contains("relationship_class") && !j.at("relationship_class").is_null()) {
                rel = parse_relationship(field(j, "relationship_class"));
            }
            const auto r = service.add_cue_phrase(field(j, "phrase"), type, rel);
            send_json(res, r.added ? 201 : 200,
                      {{"added", r.added}, {"duplicate", !r.added}, {"phrase", r.phrase}, {"lexicon_size", r.lexicon_size}});
        });
    });

    server.Get(p + "/progress", [&service](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, progress_to_json(service.progress())); });
    });

    server.Get(p + "/export", [&service](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            res.status = 200;
            res.set_content(service.export_jsonl(), "application/x-ndjson");
        });
    });
}

bool serve(AnnotationService& service, const std::string& host, int port) {
    httplib::Server server;
    install_routes(server, service);
    return server.listen(host, port);
}

}  // namespace creq
