#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "annotation_fixture.hpp"

#include "creq/annotation.hpp"
#include "creq/http_api.hpp"

using namespace creq;
using nlohmann::json;
using creq::testing::TempDir;

namespace {

class RunningServer {
public:
    explicit RunningServer(AnnotationService& service) {
        install_routes(server_, service);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~RunningServer() {
        server_.stop();
        thread_.join();
    }
    RunningServer(const RunningServer&) = delete;
    RunningServer& operator=(const RunningServer&) = delete;

    [[nodiscard]] httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

json body(const httplib::Result& r) { return json::parse(r->body); }

json label_json(const CausalLabelRecord& r) { return label_to_json(r); }

}  // namespace

TEST_CASE("task, label and progress endpoints") {
    TempDir dir("http-basic");
    AnnotationService svc(creq::testing::small_pool(), creq::testing::small_config(dir));
    RunningServer server(svc);
    auto cli = server.client();

    auto r = cli.Get("/api/v1/tasks/next?annotator=a");
    REQUIRE(r);
    CHECK(r->status == 200);
    auto task = body(r);
    CHECK(task["sentence"]["id"] == "d0-0");
    CHECK(task["predecessor"].is_null());
    CHECK(task["successor"]["id"] == "d0-1");
    CHECK(task["categories"].size() == 9);
    CHECK(task["categories"][8]["values"] == json::array({"cause", "enable", "prevent"}));
    CHECK(task["progress"]["assigned"] == 7);

    r = cli.Post("/api/v1/labels", label_json(creq::testing::full_causal("d0-0", "a")).dump(), "application/json");
    CHECK(r->status == 200);
    CHECK(body(r)["sequence"] == 1);
    CHECK(body(r)["replaced"] == false);
    r = cli.Post("/api/v1/labels", label_json(creq::testing::not_causal("d0-0", "a")).dump(), "application/json");
    CHECK(body(r)["replaced"] == true);

    auto bad = label_json(creq::testing::not_causal("d0-1", "a"));
    bad["marked"] = true;
    r = cli.Post("/api/v1/labels", bad.dump(), "application/json");
    CHECK(r->status == 400);
    CHECK(body(r)["error"].get<std::string>().find("dependent") != std::string::npos);
    r = cli.Post("/api/v1/labels", "{oops", "application/json");
    CHECK(r->status == 400);
    r = cli.Post("/api/v1/labels", label_json(creq::testing::not_causal("d1-1", "a")).dump(), "application/json");
    CHECK(r->status == 400);
    r = cli.Post("/api/v1/labels", label_json(creq::testing::not_causal("zzz", "a")).dump(), "application/json");
    CHECK(r->status == 404);

    r = cli.Get("/api/v1/tasks/next?annotator=nobody");
    CHECK(r->status == 404);
    r = cli.Get("/api/v1/tasks/next");
    CHECK(r->status == 400);

    r = cli.Post("/api/v1/tasks/defer", json{{"annotator", "a"}, {"sentence_id", "d0-1"}}.dump(), "application/json");
    CHECK(r->status == 200);
    CHECK(body(cli.Get("/api/v1/tasks/next?annotator=a"))["sentence"]["id"] == "d0-2");

    r = cli.Get("/api/v1/progress");
    CHECK(r->status == 200);
    const auto prog = body(r);
    CHECK(prog["annotators"][0]["labeled"] == 1);
    CHECK(prog["annotators"][0]["deferred"] == 1);
    CHECK(prog["assigned"] == 14);

    r = cli.Get("/api/v1/sentences/d1-2/context");
    CHECK(r->status == 200);
    CHECK(body(r)["predecessor"]["id"] == "d1-1");
    CHECK(body(r)["successor"]["id"] == "d1-3");
    CHECK(cli.Get("/api/v1/sentences/none/context")->status == 404);
    CHECK(cli.Get("/api/tasks/next?annotator=a")->status == 404);
}

TEST_CASE("cue endpoints") {
    TempDir dir("http-cues");
    auto cfg = creq::testing::small_config(dir);
    AnnotationService svc(creq::testing::small_pool(), cfg);
    RunningServer server(svc);
    auto cli = server.client();
    const auto size = body(cli.Get("/api/v1/cues"))["cues"].size();

    auto r = cli.Post("/api/v1/cues", json{{"phrase", "provided that"}, {"syntactic_type", "conjunction"}}.dump(),
                      "application/json");
    CHECK(r->status == 201);
    CHECK(body(r)["lexicon_size"] == size + 1);
    r = cli.Post("/api/v1/cues", json{{"phrase", "If"}, {"syntactic_type", "conjunction"}}.dump(), "application/json");
    CHECK(r->status == 200);
    CHECK(body(r)["duplicate"] == true);
    r = cli.Post("/api/v1/cues", json{{"phrase", "   "}, {"syntactic_type", "conjunction"}}.dump(), "application/json");
    CHECK(r->status == 400);
    r = cli.Post("/api/v1/cues", json{{"phrase", "x"}, {"syntactic_type", "noun"}}.dump(), "application/json");
    CHECK(r->status == 400);

    auto rec = creq::testing::full_causal("d0-0", "a");
    rec.cue_phrases = {"in case of", "provided that"};
    CHECK(cli.Post("/api/v1/labels", label_json(rec).dump(), "application/json")->status == 200);
    const auto cues = body(cli.Get("/api/v1/cues"))["cues"];
    CHECK(cues.size() == size + 1);
    for (const auto& c : cues) {
        if (c["phrase"] == "in case of" || c["phrase"] == "provided that") CHECK(c["usage"] == 1);
    }
    CHECK(load_lexicon(cfg.lexicon_path).find("provided that"));
}

TEST_CASE("export over HTTP equals the replayed log") {
    TempDir dir("http-export");
    auto cfg = creq::testing::small_config(dir);
    cfg.store_options.snapshot_interval = 4;
    AnnotationService svc(creq::testing::small_pool(), cfg);
    RunningServer server(svc);
    std::vector<std::thread> clients;
    for (const std::string who : {"a", "b"}) {
        clients.emplace_back([&server, who] {
            auto cli = server.client();
            for (;;) {
                auto r = cli.Get("/api/v1/tasks/next?annotator=" + who);
                if (!r || r->status == 409) break;
                const auto id = json::parse(r->body)["sentence"]["id"].get<std::string>();
                const auto rec = id.back() == '0' ? creq::testing::full_causal(id, who) : creq::testing::not_causal(id, who);
                cli.Post("/api/v1/labels", label_to_json(rec).dump(), "application/json");
            }
        });
    }
    for (auto& t : clients) t.join();
    auto cli = server.client();
    const auto exported = cli.Get("/api/v1/export");
    REQUIRE(exported);
    CHECK(exported->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(exported->body == replay_log(svc.store().log_path()).export_jsonl());
    CHECK(std::count(exported->body.begin(), exported->body.end(), '\n') == 14);
    CHECK(body(cli.Get("/api/v1/progress"))["labeled"] == 14);
}
