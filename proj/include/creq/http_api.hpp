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

#ifndef CREQ_HTTP_API_HPP
#define CREQ_HTTP_API_HPP

#include <string>

namespace httplib {
class Server;
}

namespace creq {

class AnnotationService;

inline constexpr const char* kApiPrefix = "/api/v1";
inline constexpr const char* kStoreEnvVar = "CREQ_STORE";

/// Registers the annotation endpoints under /api/v1:
///   GET  tasks/next?annotator=ID     next task with context and category schema
///   POST tasks/defer                 {"annotator","sentence_id"}
///   POST labels                      label object (corpus schema plus sentence_id)
///   GET  sentences/{id}/context
///   GET  cues, POST cues             {"phrase","syntactic_type"[, "relationship_class"]}
///   GET  progress
///   GET  export                      current labels as JSONL
/// Errors are {"error": message} with 400 (invalid input), 404 (unknown id)
/// or 409 (assignment exhausted).
void install_routes(httplib::Server& server, AnnotationService& service);

/// Blocks serving until the server is stopped.
bool serve(AnnotationService& service, const std::string& host, int port);

}  // namespace creq

#endif  // CREQ_HTTP_API_HPP
