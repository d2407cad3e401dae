// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>

#include "gascraft/env.hpp"
#include "gascraft/synthesize.hpp"
#include "test_util.hpp"

using namespace gascraft;

namespace {

const char* kPayer = "0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa";
const char* kReceiver = "0xbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbb";

// Instance whose bindings match the golden contract fixtures: deploy 537300,
// settleFixedLeg 56820, settleFloatLeg 65293 under the zero selection.
const char* kGoldenInstanceJson = R"({
  "contractType": "EquitySwap",
  "id": "ES_TEST_1",
  "fields": {
    "trade": {
      "tradeDate": 1700000000,
      "product": {
        "performancePayout": {
          "terminationDate": 1790000000,
          "valuation": {"initialPrice": 100000000000, "finalPrice": 130000000000},
          "numberOfUnits": 1500
        },
        "fixedPayout": {
          "notional": {"amount": 5000000000, "currency": "USD"},
          "dividendRate": 2500000
        }
      },
      "parties": {
        "payer": {"address": "0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa"},
        "receiver": {"address": "0xbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbbb"}
      }
    }
  }
})";

struct MiniWorld {
    SnippetLibrary lib;
    BlueprintSet bps;
    SchemaSet schemas;
    BuiltinEvaluator evaluator;
    AssemblyEnv env;

    MiniWorld()
        : lib(load_library(gascraft::testing::data_dir() + "/library/mini.json")),
          bps(load_blueprints(gascraft::testing::data_dir() + "/blueprints/mini.json", lib)),
          schemas(load_schema_dir(gascraft::testing::schema_dir())),
          env(lib, bps, schemas, evaluator) {}

    CdmInstance golden() const { return parse_cdm(kGoldenInstanceJson, schemas); }

    std::vector<int> zeros() const {
        return std::vector<int>(static_cast<std::size_t>(lib.symbol_count()), 0);
    }
};

EvaluationReport make_report(bool compile_ok, double deploy_gas,
                             std::vector<std::pair<bool, double>> functions,
                             int distinct_errors = 0) {
    EvaluationReport r;
    r.compile_ok = compile_ok;
    r.distinct_errors = distinct_errors;
    r.deploy_gas = deploy_gas;
    for (std::size_t i = 0; i < functions.size(); ++i) {
        FunctionReport fn;
        fn.name = "fn" + std::to_string(i);
        fn.passed = functions[i].first;
        fn.gas = functions[i].second;
        r.functions.push_back(fn);
        if (fn.passed) ++r.functions_passed;
    }
    return r;
}

} // namespace

TEST_CASE("phase 1 reward follows the error count schedule") {
    EnvConfig cfg;
    CHECK(reward_phase1(make_report(true, 0, {}), cfg) == 200.0);
    CHECK(reward_phase1(make_report(false, 0, {}, 0), cfg) == -110.0);
    CHECK(reward_phase1(make_report(false, 0, {}, 1), cfg) == -110.0);
    CHECK(reward_phase1(make_report(false, 0, {}, 3), cfg) == -130.0);
    CHECK(reward_phase1(make_report(false, 0, {}, 10), cfg) == -200.0);
    CHECK(reward_phase1(make_report(false, 0, {}, 12), cfg) == -200.0);
}

TEST_CASE("phase 2 reward is budget-weighted and substitutes failed functions") {
    EnvConfig cfg;
    CHECK(reward_phase2(make_report(false, 0, {}, 2), cfg) == -200.0);
    // 600k deploy is half the deploy budget, 45k is half the function budget.
    CHECK(reward_phase2(make_report(true, 600000, {{true, 45000}, {true, 45000}}), cfg) ==
          doctest::Approx(750.0).epsilon(1e-12));
    // The failed function is charged the full 90k budget: avg (30k+90k)/2 = 60k.
    CHECK(reward_phase2(make_report(true, 600000, {{true, 30000}, {false, 20000}}), cfg) ==
          doctest::Approx(587.5).epsilon(1e-12));
    // Everything at or over budget scores zero reward.
    CHECK(reward_phase2(make_report(true, 2400000, {{true, 180000}}), cfg) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(reward_phase2(make_report(true, 537300, {{true, 56820}, {true, 65293}}), cfg) ==
          doctest::Approx(603.4858333333333).epsilon(1e-12));
}

TEST_CASE("normalized gas score complements the phase 2 reward fraction") {
    EnvConfig cfg;
    CHECK_THROWS_WITH_AS(normalized_gas_score(make_report(false, 0, {}, 1), cfg),
                         doctest::Contains("compiling"), GascraftError);
    CHECK(normalized_gas_score(make_report(true, 537300, {{true, 56820}, {true, 65293}}), cfg) ==
          doctest::Approx(0.5976761111111111).epsilon(1e-12));
    // 0.35 * 470765/1.2e6 + 0.65 * 38931/9e4.
    CHECK(normalized_gas_score(make_report(true, 470765, {{true, 38931}}), cfg) ==
          doctest::Approx(0.4184747916666667).epsilon(1e-12));
    CHECK(normalized_gas_score(make_report(true, 0, {{true, 0}}), cfg) == 0.0);

    std::mt19937_64 rng(20260816);
    std::uniform_real_distribution<double> deploy(0.0, 2500000.0);
    std::uniform_real_distribution<double> gas(0.0, 200000.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::pair<bool, double>> fns;
        int n = 1 + static_cast<int>(coin(rng) * 4.0);
        for (int j = 0; j < n; ++j) fns.push_back({coin(rng) < 0.8, gas(rng)});
        EvaluationReport r = make_report(true, deploy(rng), fns);
        double score = normalized_gas_score(r, cfg);
        CHECK(score >= 0.0);
        CHECK(score <= 1.0);
        CHECK(score + reward_phase2(r, cfg) / cfg.reward_scale ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("observation is type one-hot, feedback block, then instance features") {
    MiniWorld w;
    CHECK(w.env.observation_width() == 19); // 5 + 2*2 + 10
    CHECK(w.env.action_shape() == action_space_shape(w.lib));
    CHECK(w.env.universal_functions().size() == 2);

    CdmInstance instance = w.golden();
    std::vector<double> obs = w.env.reset(instance);
    REQUIRE(static_cast<int>(obs.size()) == 19);

    // EquitySwap one-hot.
    CHECK(obs[0] == 0.0);
    CHECK(obs[1] == 1.0);
    CHECK(obs[2] == 0.0);
    CHECK(obs[3] == 0.0);
    CHECK(obs[4] == 0.0);

    // No previous episode: feedback reads zero.
    for (int i = 5; i < 9; ++i) CHECK(obs[static_cast<std::size_t>(i)] == 0.0);

    VariableBindings bindings = apply_mapping(instance, w.schemas);
    FeatureVector features = extract_features(bindings, w.schemas.of(ContractType::EquitySwap));
    for (int i = 0; i < kFeatureWidth; ++i)
        CHECK(obs[static_cast<std::size_t>(9 + i)] == features[static_cast<std::size_t>(i)]);

    // Active-symbol mask covers exactly the blueprint symbols.
    const Blueprint& bp = w.bps.of(ContractType::EquitySwap);
    int active = 0;
    for (std::uint8_t f : w.env.active_symbols()) active += f;
    CHECK(active == static_cast<int>(bp.required.size()));
}

TEST_CASE("feedback carries the previous episode and clears on compile failure") {
    MiniWorld w;
    CdmInstance instance = w.golden();

    w.env.reset(instance);
    StepResult ok = w.env.step(w.zeros());
    CHECK(ok.done);
    CHECK(ok.report.compile_ok);
    CHECK(ok.report.deploy_gas == 537300.0);

    std::vector<double> obs = w.env.reset(instance);
    // Universal order in the mini library: settleFixedLeg then settleFloatLeg.
    CHECK(obs[5] == 1.0);
    CHECK(obs[6] == doctest::Approx(0.3686666666666667).epsilon(1e-12)); // 1 - 56820/90000
    CHECK(obs[7] == 1.0);
    CHECK(obs[8] == doctest::Approx(0.2745222222222222).epsilon(1e-12)); // 1 - 65293/90000

    // settleFixedLeg variant 2 declares the same local twice: compile failure.
    std::vector<int> trap = w.zeros();
    trap[static_cast<std::size_t>(w.lib.index_of("settleFixedLeg"))] = 2;
    StepResult bad = w.env.step(trap);
    CHECK_FALSE(bad.report.compile_ok);
    CHECK(bad.norm_gas == 1.0);

    obs = w.env.reset(instance);
    for (int i = 5; i < 9; ++i) CHECK(obs[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("step rewards track the active phase") {
    MiniWorld w;
    CdmInstance instance = w.golden();

    w.env.reset(instance);
    StepResult p1 = w.env.step(w.zeros());
    CHECK(p1.reward == 200.0);

    std::vector<int> trap = w.zeros();
    trap[static_cast<std::size_t>(w.lib.index_of("settleFixedLeg"))] = 2;
    w.env.reset(instance);
    StepResult p1bad = w.env.step(trap);
    CHECK(p1bad.reward == -110.0); // one distinct error
    CHECK(p1bad.report.distinct_errors == 1);

    w.env.set_phase(2);
    w.env.reset(instance);
    StepResult p2 = w.env.step(w.zeros());
    CHECK(p2.reward == doctest::Approx(603.4858333333333).epsilon(1e-12));
    CHECK(p2.norm_gas == doctest::Approx(0.5976761111111111).epsilon(1e-12));
    CHECK(p2.reward == doctest::Approx((1.0 - p2.norm_gas) * 1500.0).epsilon(1e-12));

    w.env.reset(instance);
    StepResult p2bad = w.env.step(trap);
    CHECK(p2bad.reward == -200.0);
}

TEST_CASE("environment rejects malformed use") {
    MiniWorld w;
    CdmInstance instance = w.golden();

    CHECK_THROWS_WITH_AS(w.env.step(w.zeros()), doctest::Contains("before reset"),
                         GascraftError);
    CHECK_THROWS_AS(w.env.blueprint(), GascraftError);
    CHECK_THROWS_AS(w.env.set_phase(3), GascraftError);

    w.env.reset(instance);
    std::vector<int> short_action(3, 0);
    CHECK_THROWS_AS(w.env.step(short_action), GascraftError);

    std::vector<int> wild = w.zeros();
    wild[static_cast<std::size_t>(w.lib.index_of("quantity"))] = 99;
    try {
        w.env.step(wild);
        FAIL("expected ActionOutOfRange");
    } catch (const GascraftError& e) {
        CHECK(e.code() == ErrorCode::ActionOutOfRange);
    }

    // Variants outside the blueprint are ignored rather than validated.
    CHECK(w.env.blueprint().type == ContractType::EquitySwap);
}

TEST_CASE("full library: width 33 and non-blueprint variants are ignored") {
    SnippetLibrary lib = load_library(gascraft::testing::data_dir() + "/library/full.json");
    BlueprintSet bps =
        load_blueprints(gascraft::testing::data_dir() + "/blueprints/full.json", lib);
    SchemaSet schemas = load_schema_dir(gascraft::testing::schema_dir());
    BuiltinEvaluator evaluator;
    AssemblyEnv env(lib, bps, schemas, evaluator);

    CHECK(env.observation_width() == 33); // 5 + 2*9 + 10
    CHECK(env.universal_functions().size() == 9);

    std::vector<CdmInstance> data =
        generate_dataset(schemas, ContractType::EquitySwap, 1, 77);
    std::vector<double> obs = env.reset(data[0]);
    CHECK(static_cast<int>(obs.size()) == 33);
    CHECK(obs[1] == 1.0);

    // notional belongs to the swap blueprint, not the equity one; a wild
    // variant index there must not disturb the episode.
    std::vector<int> action(static_cast<std::size_t>(lib.symbol_count()), 0);
    action[static_cast<std::size_t>(lib.index_of("notional"))] = 99;
    StepResult r = env.step(action);
    CHECK(r.report.compile_ok);
    CHECK(r.reward == 200.0);
}

TEST_CASE("contracts returned by step carry the assembled source") {
    MiniWorld w;
    w.env.reset(w.golden());
    StepResult r = w.env.step(w.zeros());
    CHECK(r.contract.contract_name == "ES_TEST_1");
    CHECK(r.contract.source.size() == 1522);
    CHECK(r.contract.source.find("contract ES_TEST_1") != std::string::npos);
}
