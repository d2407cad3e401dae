// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "gascraft/harness.hpp"
#include "test_util.hpp"

using namespace gascraft;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

// Small mini-library run that finishes in seconds.
std::string write_tiny_config(const std::string& dir, const std::string& name = "run") {
    const std::string data = gascraft::testing::data_dir();
    nlohmann::json doc = {
        {"library", data + "/library/mini.json"},
        {"blueprints", data + "/blueprints/mini.json"},
        {"schemas", gascraft::testing::schema_dir()},
        {"dataset_dir", dir + "/dataset"},
        {"out_dir", dir + "/" + name},
        {"dataset", {{"train_per_type", 40}, {"test_per_type", 6}}},
        {"ppo", {{"learning_rate", 0.001}, {"minibatch_size", 32}}},
        {"train",
         {{"batch_size", 64},
          {"phase1_max_steps", 600},
          {"phase2_steps", 300},
          {"phase_window", 100},
          {"log_every", 100},
          {"checkpoint_every", 300},
          {"hidden", 32}}},
    };
    const std::string path = dir + "/config.json";
    std::ofstream os(path);
    os << doc.dump(2);
    os.close();
    return path;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("run config applies defaults, resolves paths, and rejects typos") {
    const std::string dir = gascraft::testing::temp_dir("config");
    const std::string path = write_tiny_config(dir);

    RunConfig config = load_run_config(path);
    CHECK(config.evaluator == "builtin");
    CHECK(config.train.batch_size == 64);
    CHECK(config.train.phase_gate == 0.95);      // default
    CHECK(config.ppo.clip_ratio == 0.2);         // default
    CHECK(config.env.reward_scale == 1500.0);    // default
    CHECK(config.dataset.train_per_type == 40);
    CHECK(fs::path(config.library_path).is_absolute());
    CHECK(config.out_dir == dir + "/run");
    CHECK(config.config_hash.size() == 16);

    // Relative paths resolve against the config file directory.
    {
        std::ofstream os(dir + "/rel.json");
        os << R"({"library": "lib.json", "blueprints": "bp.json", "schemas": "schemas",
                  "dataset_dir": "data", "out_dir": "out"})";
    }
    RunConfig rel = load_run_config(dir + "/rel.json");
    CHECK(rel.library_path == dir + "/lib.json");
    CHECK(rel.dataset_dir == dir + "/data");

    {
        std::ofstream os(dir + "/typo.json");
        os << R"({"library": "a", "blueprints": "b", "schemas": "c", "dataset_dir": "d",
                  "out_dir": "e", "trian": {}})";
    }
    CHECK_THROWS_AS(load_run_config(dir + "/typo.json"), GascraftError);

    {
        std::ofstream os(dir + "/bad_eval.json");
        os << R"({"library": "a", "blueprints": "b", "schemas": "c", "dataset_dir": "d",
                  "out_dir": "e", "evaluator": "simulated"})";
    }
    CHECK_THROWS_AS(load_run_config(dir + "/bad_eval.json"), GascraftError);

    {
        std::ofstream os(dir + "/missing.json");
        os << R"({"library": "a"})";
    }
    CHECK_THROWS_AS(load_run_config(dir + "/missing.json"), GascraftError);
    CHECK_THROWS_AS(load_run_config(dir + "/nonexistent.json"), GascraftError);

    // Config hash is stable across loads and sensitive to settings.
    CHECK(load_run_config(path).config_hash == config.config_hash);
    CHECK(rel.config_hash != config.config_hash);
}

TEST_CASE("gen-data is deterministic and keeps the splits disjoint") {
    const std::string dir = gascraft::testing::temp_dir("gendata");
    const std::string path = write_tiny_config(dir);
    RunConfig config = load_run_config(path);

    CHECK(cmd_gen_data(config, 11) == 0);
    const std::string train_dir = config.dataset_dir + "/train/EquitySwap";
    const std::string test_dir = config.dataset_dir + "/test/EquitySwap";

    std::set<std::string> train_ids, test_ids;
    for (const auto& entry : fs::directory_iterator(train_dir))
        train_ids.insert(entry.path().stem().string());
    for (const auto& entry : fs::directory_iterator(test_dir))
        test_ids.insert(entry.path().stem().string());
    CHECK(train_ids.size() == 40);
    CHECK(test_ids.size() == 6);
    for (const std::string& id : test_ids) CHECK(train_ids.count(id) == 0);

    // Instances parse back and carry the right type.
    World world = load_world(config);
    std::vector<CdmInstance> loaded = load_dataset(config, world, "train");
    CHECK(loaded.size() == 40);
    CHECK(loaded[0].type == ContractType::EquitySwap);

    // A rerun into a second directory produces byte-identical files.
    const std::string dir2 = gascraft::testing::temp_dir("gendata2");
    const std::string path2 = write_tiny_config(dir2);
    RunConfig config2 = load_run_config(path2);
    CHECK(cmd_gen_data(config2, 11) == 0);
    CHECK(slurp(config2.dataset_dir + "/manifest.json") ==
          slurp(config.dataset_dir + "/manifest.json"));
    const std::string sample = *train_ids.begin() + ".json";
    CHECK(slurp(config2.dataset_dir + "/train/EquitySwap/" + sample) ==
          slurp(config.dataset_dir + "/train/EquitySwap/" + sample));

    // A different seed produces different instances.
    const std::string dir3 = gascraft::testing::temp_dir("gendata3");
    RunConfig config3 = load_run_config(write_tiny_config(dir3));
    CHECK(cmd_gen_data(config3, 12) == 0);
    CHECK(slurp(config3.dataset_dir + "/manifest.json") !=
          slurp(config.dataset_dir + "/manifest.json"));
}

TEST_CASE("the training loop logs metrics, flips phase once, and checkpoints") {
    const std::string dir = gascraft::testing::temp_dir("train");
    RunConfig config = load_run_config(write_tiny_config(dir));
    REQUIRE(cmd_gen_data(config, 3) == 0);

    TrainResult result = train_loop(config, 5);
    CHECK(result.steps == 900); // 600 phase-1 cap + 300 phase-2
    CHECK(result.phase_flip_step == 600);

    const std::string metrics = slurp(result.metrics_path);
    CHECK(metrics.rfind("step,phase,reward,compile_success,norm_gas,entropy_coef\n", 0) == 0);
    CHECK(count_lines(metrics) == 10); // header + 9 rows at log_every=100

    REQUIRE(result.rows.size() == 9);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const MetricsRow& row = result.rows[i];
        CHECK(row.step == static_cast<std::int64_t>(100 * (i + 1)));
        CHECK((row.phase == 1 || row.phase == 2));
        if (i > 0) CHECK(row.phase >= result.rows[i - 1].phase);
        CHECK(row.compile_success >= 0.0);
        CHECK(row.compile_success <= 1.0);
        CHECK(row.entropy_coef <= 0.05);
        CHECK(row.entropy_coef >= 0.005);
    }
    CHECK(result.rows[5].phase == 1); // step 600 logs before the flip applies
    CHECK(result.rows[6].phase == 2);

    for (const char* name : {"baseline.ckpt", "phase1.ckpt", "latest.ckpt", "final.ckpt"})
        CHECK(fs::exists(config.checkpoint_dir() + std::string("/") + name));

    CheckpointData final_ckpt = load_checkpoint(result.final_checkpoint);
    CHECK(final_ckpt.metadata["step"] == 900);
    CHECK(final_ckpt.metadata["phase"] == 2);
    CHECK(final_ckpt.metadata["phase_flip_step"] == 600);
    CHECK(final_ckpt.metadata["config_hash"] == config.config_hash);
    CHECK(final_ckpt.metadata["seed"] == 5);

    CheckpointData baseline = load_checkpoint(config.checkpoint_dir() + "/baseline.ckpt");
    CHECK(baseline.metadata["step"] == 0);
    CHECK(baseline.net.w1 != final_ckpt.net.w1); // training moved the weights

    // Resuming a finished run is a no-op that preserves the metrics file.
    TrainResult resumed = train_loop(config, 5, result.final_checkpoint);
    CHECK(resumed.steps == 900);
    CHECK(resumed.rows.empty());
    CHECK(slurp(result.metrics_path) == metrics);

    // A checkpoint from a different config is rejected.
    const std::string dir2 = gascraft::testing::temp_dir("train-other");
    RunConfig other = load_run_config(write_tiny_config(dir2, "other"));
    REQUIRE(cmd_gen_data(other, 3) == 0);
    CHECK_THROWS_AS(train_loop(other, 5, result.final_checkpoint), GascraftError);
}

TEST_CASE("same-seed training runs write byte-identical metrics") {
    const std::string dir_a = gascraft::testing::temp_dir("twin-a");
    const std::string dir_b = gascraft::testing::temp_dir("twin-b");
    RunConfig a = load_run_config(write_tiny_config(dir_a));
    RunConfig b = load_run_config(write_tiny_config(dir_b));
    REQUIRE(cmd_gen_data(a, 21) == 0);
    REQUIRE(cmd_gen_data(b, 21) == 0);

    TrainResult ra = train_loop(a, 9);
    TrainResult rb = train_loop(b, 9);
    CHECK(slurp(ra.metrics_path) == slurp(rb.metrics_path));

    const std::string dir_c = gascraft::testing::temp_dir("twin-c");
    RunConfig c = load_run_config(write_tiny_config(dir_c));
    REQUIRE(cmd_gen_data(c, 21) == 0);
    TrainResult rc = train_loop(c, 10);
    CHECK(slurp(rc.metrics_path) != slurp(ra.metrics_path));
}

TEST_CASE("eval writes per-type baseline and final rows, a chart, and contracts") {
    const std::string dir = gascraft::testing::temp_dir("eval");
    RunConfig config = load_run_config(write_tiny_config(dir));
    REQUIRE(cmd_gen_data(config, 3) == 0);
    train_loop(config, 5);

    const std::string emit = dir + "/emitted";
    EvalResult result = eval_run(config, "", "", emit);

    REQUIRE(result.rows.size() == 2); // one type, two models
    CHECK(result.rows[0].model == "baseline");
    CHECK(result.rows[1].model == "final");
    for (const EvalRow& row : result.rows) {
        CHECK(row.type == "EquitySwap");
        CHECK(row.instances == 6);
        CHECK(row.compile_rate >= 0.0);
        CHECK(row.compile_rate <= 1.0);
        if (row.compiled > 0) {
            CHECK(row.mean_norm_gas > 0.0);
            CHECK(row.mean_norm_gas <= 1.0);
        }
    }
    CHECK(result.rows[0].delta_pct == 0.0);

    // Identical checkpoints in both roles null the reduction.
    EvalResult same = eval_run(config, config.checkpoint_dir() + "/final.ckpt", "", "");
    for (const EvalRow& row : same.rows)
        CHECK(row.delta_pct == 0.0);

    const std::string csv = slurp(result.csv_path);
    CHECK(csv.rfind("type,model,instances,compiled,compile_rate,mean_norm_gas,"
                    "mean_deploy_gas,mean_function_gas,mean_reward,delta_pct\n",
                    0) == 0);
    CHECK(count_lines(csv) == 3);
    CHECK(slurp(result.svg_path).find("<svg") != std::string::npos);

    int emitted = 0;
    for (const auto& entry : fs::directory_iterator(emit + "/EquitySwap")) {
        CHECK(entry.path().extension() == ".sol");
        CHECK(slurp(entry.path().string()).find("contract ") != std::string::npos);
        ++emitted;
    }
    CHECK(emitted == 6);

    // Missing checkpoints fail cleanly.
    const std::string dir2 = gascraft::testing::temp_dir("eval-empty");
    RunConfig empty = load_run_config(write_tiny_config(dir2));
    REQUIRE(cmd_gen_data(empty, 3) == 0);
    CHECK_THROWS_AS(eval_run(empty, "", "", ""), GascraftError);
}

TEST_CASE("brute force enumerates the blueprint space and caches results") {
    const std::string dir = gascraft::testing::temp_dir("brute");
    RunConfig config = load_run_config(write_tiny_config(dir));
    REQUIRE(cmd_gen_data(config, 3) == 0);

    nlohmann::json out = brute_force_run(config, 2);
    CHECK(out["computed"] == 2);
    CHECK(out["cache_hits"] == 0);
    CHECK(out["gas_model"] == "builtin-gas-v1");
    REQUIRE(out["instances"].size() == 2);
    for (const auto& [id, entry] : out["instances"].items()) {
        (void)id;
        CHECK(entry["evaluated"] == 1296); // the full mini selection space
        CHECK(entry["full_pass"].get<int>() > 0);
        REQUIRE(!entry["best"].is_null());
        CHECK(entry["best"]["score"].get<double>() > 0.0);
        CHECK(entry["best"]["score"].get<double>() <= 1.0);
        CHECK(entry["best"]["selection"].size() == 12);
    }

    nlohmann::json again = brute_force_run(config, 2);
    CHECK(again["cache_hits"] == 2);
    CHECK(again["computed"] == 0);
    CHECK(again["instances"] == out["instances"]);

    // The full library's selection space blows the cap.
    const std::string dir2 = gascraft::testing::temp_dir("brute-full");
    const std::string data = gascraft::testing::data_dir();
    nlohmann::json doc = {
        {"library", data + "/library/full.json"},
        {"blueprints", data + "/blueprints/full.json"},
        {"schemas", gascraft::testing::schema_dir()},
        {"dataset_dir", dir2 + "/dataset"},
        {"out_dir", dir2 + "/run"},
        {"dataset", {{"train_per_type", 1}, {"test_per_type", 1}}},
    };
    {
        std::ofstream os(dir2 + "/config.json");
        os << doc.dump(2);
    }
    RunConfig full = load_run_config(dir2 + "/config.json");
    REQUIRE(cmd_gen_data(full, 3) == 0);
    try {
        brute_force_run(full, 0);
        FAIL("expected SpaceTooLarge");
    } catch (const GascraftError& e) {
        CHECK(e.code() == ErrorCode::SpaceTooLarge);
    }
}

TEST_CASE("report smooths the metrics into curves") {
    const std::string dir = gascraft::testing::temp_dir("report");
    RunConfig config = load_run_config(write_tiny_config(dir));
    REQUIRE(cmd_gen_data(config, 3) == 0);
    train_loop(config, 5);

    CHECK(cmd_report(config) == 0);
    const std::string csv = slurp(config.out_dir + "/report.csv");
    CHECK(csv.rfind("step,reward_smoothed,compile_success_smoothed,norm_gas_smoothed\n", 0) ==
          0);
    CHECK(count_lines(csv) == 10); // header + one smoothed row per metrics row
    const std::string svg = slurp(config.out_dir + "/report.svg");
    CHECK(svg.find("window=500") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);

    const std::string dir2 = gascraft::testing::temp_dir("report-empty");
    RunConfig empty = load_run_config(write_tiny_config(dir2));
    CHECK_THROWS_AS(cmd_report(empty), GascraftError);
}
