// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "seqx/cli.hpp"
#include "seqx/model_io.hpp"

using namespace seqx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "seqx");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string tmp(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "seqx_cli_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

json read(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(run({}) == kExitValidation);
  CHECK(run({"eval", "--data", "x", "--strategy", "rs", "--report", "y"}) == kExitValidation);
  CHECK(run({"check-exact", "--bogus"}) == kExitValidation);
  CHECK(run({"frobnicate"}) == kExitValidation);
  CHECK(run({"gen-data", "--scenes", "3", "--refs", "9", "--out", tmp("bad.jsonl")}) ==
        kExitValidation);
  CHECK(run({"eval", "--model", tmp("absent.json"), "--data", tmp("absent.jsonl"), "--strategy",
             "rs", "--report", tmp("r.json")}) == kExitValidation);
}

TEST_CASE("check-exact") {
  CHECK(run({"check-exact", "--vocab-size", "3", "--max-len", "3", "--seed", "0"}) == kExitOk);
}

TEST_CASE("gen-data, train, eval pipeline on 100 scenes") {
  const std::string data = tmp("scenes.jsonl");
  REQUIRE(run({"gen-data", "--scenes", "100", "--refs", "4", "--seed", "3", "--out", data}) ==
          kExitOk);
  const std::string cfg = tmp("cfg.json");
  write(cfg, R"({"hidden": 16, "emb_dim": 8, "M": 1, "N": 2, "s": 3, "lr_xe": 0.01,
                 "lr_sll": 0.001, "max_len": 10, "seed": 1, "objective": "XE"})");
  const std::string model = tmp("model.json");
  const std::string log = tmp("log.jsonl");
  REQUIRE(run({"train", "--config", cfg, "--data", data, "--out", model, "--objective",
               "sll-sle", "--log", log}) == kExitOk);
  std::ifstream in(log);
  std::string line;
  std::vector<json> records;
  while (std::getline(in, line)) records.push_back(json::parse(line));
  REQUIRE(records.size() == 2);
  CHECK(records[1].at("phase") == "sequence");
  CHECK(load_model(model).params.dims().hidden == 16);

  for (const char* strategy : {"rs", "bs"}) {
    const std::string report = tmp(std::string("report_") + strategy + ".json");
    REQUIRE(run({"eval", "--model", model, "--data", data, "--strategy", strategy, "--seed", "4",
                 "--report", report}) == kExitOk);
    const json r = read(report);
    CHECK(r.at("strategy") == strategy);
    CHECK(r.at("num_inputs") == 100);
    CHECK(r.at("div1").get<double>() > 0.0);
  }
  const std::string again = tmp("report_rs2.json");
  REQUIRE(run({"eval", "--model", model, "--data", data, "--strategy", "rs", "--seed", "4",
               "--report", again}) == kExitOk);
  CHECK(read(again) == read(tmp("report_rs.json")));

  write(cfg, R"({"hdden": 16})");
  CHECK(run({"train", "--config", cfg, "--data", data, "--out", model}) == kExitValidation);
  write(cfg, "{ not json");
  CHECK(run({"train", "--config", cfg, "--data", data, "--out", model}) == kExitValidation);
}

TEST_CASE("score") {
  const std::string cands = tmp("cands.jsonl");
  const std::string refs = tmp("refs.jsonl");
  write(cands,
        "{\"id\": \"a\", \"captions\": [\"a red circle moves left\", \"a red circle moves left\"]}\n"
        "{\"id\": \"b\", \"captions\": [\"the blue box moves up\", \"a blue box is moving up\"]}\n");
  write(refs,
        "{\"id\": \"a\", \"captions\": [\"a red circle moves left\"]}\n"
        "{\"id\": \"b\", \"captions\": [\"the blue box moves up\", \"a blue box moves up\"]}\n");
  const std::string report = tmp("score.json");
  REQUIRE(run({"score", "--candidates", cands, "--references", refs, "--report", report}) ==
          kExitOk);
  const json r = read(report);
  CHECK(r.at("num_inputs") == 2);
  const json& a = r.at("per_input")[0];
  CHECK(a.at("cider")[0].get<double>() == doctest::Approx(1.0));
  CHECK(a.at("mbleu4").get<double>() == 1.0);
  CHECK(a.at("div1").get<double>() == doctest::Approx(0.5));

  write(cands, "{\"id\": \"zzz\", \"captions\": [\"a red circle\"]}\n");
  CHECK(run({"score", "--candidates", cands, "--references", refs, "--report", report}) ==
        kExitValidation);
  write(cands, "{\"id\": \"a\"}\n");
  CHECK(run({"score", "--candidates", cands, "--references", refs, "--report", report}) ==
        kExitValidation);
}

}  // TEST_SUITE
