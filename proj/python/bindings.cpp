// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gascraft/env.hpp"
#include "gascraft/harness.hpp"
#include "gascraft/ppo.hpp"

namespace py = pybind11;
using json = nlohmann::json;

namespace gascraft {
namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json deltas_to_json(const BalanceDeltas& deltas) {
    json out = json::object();
    for (const auto& [party, amount] : deltas) out[party] = i128_to_string(amount);
    return out;
}

json function_report_to_json(const FunctionReport& fn) {
    return json{{"name", fn.name},
                {"passed", fn.passed},
                {"reverted", fn.reverted},
                {"overflowed", fn.overflowed},
                {"revert_reason", fn.revert_reason},
                {"gas", fn.gas},
                {"expected", deltas_to_json(fn.expected)},
                {"actual", deltas_to_json(fn.actual)}};
}

json report_to_json(const EvaluationReport& report) {
    json errors = json::array();
    for (const auto& e : report.static_errors)
        errors.push_back({{"class", std::string(error_class_name(e.cls))},
                          {"symbol", e.symbol},
                          {"detail", e.detail}});
    json functions = json::array();
    for (const auto& fn : report.functions) functions.push_back(function_report_to_json(fn));
    return json{{"compile_ok", report.compile_ok},
                {"static_errors", errors},
                {"distinct_errors", report.distinct_errors},
                {"deploy_gas", report.deploy_gas},
                {"functions", functions},
                {"functions_passed", report.functions_passed},
                {"model_version", report.model_version}};
}

// Minimal report shape the reward formulas consume: compile_ok,
// distinct_errors, deploy_gas, functions[{passed, gas}].
EvaluationReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    EvaluationReport report;
    report.compile_ok = j.value("compile_ok", false);
    report.distinct_errors = j.value("distinct_errors", 0);
    report.deploy_gas = j.value("deploy_gas", static_cast<long long>(0));
    for (const auto& f : j.value("functions", json::array())) {
        FunctionReport fn;
        fn.name = f.value("name", "");
        fn.passed = f.value("passed", false);
        fn.gas = f.value("gas", static_cast<long long>(0));
        if (fn.passed) ++report.functions_passed;
        report.functions.push_back(std::move(fn));
    }
    return report;
}

SnippetSelection selection_from(const std::vector<int>& variant) {
    SnippetSelection sel;
    sel.variant = variant;
    return sel;
}

// Loaded library, blueprints, and schemas with the builtin evaluator; the
// stateful entry point for assembling and scoring individual selections.
class Workspace {
  public:
    Workspace(const std::string& library_path, const std::string& blueprint_path,
              const std::string& schema_dir)
        : lib_(load_library(library_path)),
          bps_(load_blueprints(blueprint_path, lib_)),
          schemas_(load_schema_dir(schema_dir)) {}

    std::vector<std::string> contract_types() const {
        std::vector<std::string> out;
        for (int t = 0; t < kContractTypeCount; ++t)
            if (bps_.present[static_cast<std::size_t>(t)])
                out.emplace_back(contract_type_name(static_cast<ContractType>(t)));
        return out;
    }

    std::vector<std::string> symbols() const {
        std::vector<std::string> out;
        for (const auto& s : lib_.symbols) out.push_back(s.name);
        return out;
    }

    std::vector<int> action_shape() const { return action_space_shape(lib_); }

    std::string library_hash() const { return hex64(lib_.content_hash); }

    std::string assemble_contract(const std::string& instance_json,
                                  const std::vector<int>& selection) const {
        CdmInstance instance = parse_cdm(instance_json, schemas_);
        VariableBindings bindings = apply_mapping(instance, schemas_);
        AssembledContract contract = assemble(lib_, bps_.of(instance.type), instance.id,
                                              bindings, selection_from(selection));
        json params = json::array();
        for (const auto& p : contract.constructor_params) params.push_back(p.name);
        json out{{"contract_name", contract.contract_name},
                 {"source", contract.source},
                 {"constructor_params", params}};
        return out.dump();
    }

    std::string evaluate_selection(const std::string& instance_json,
                                   const std::vector<int>& selection) const {
        CdmInstance instance = parse_cdm(instance_json, schemas_);
        VariableBindings bindings = apply_mapping(instance, schemas_);
        const Blueprint& bp = bps_.of(instance.type);
        AssembledContract contract =
            assemble(lib_, bp, instance.id, bindings, selection_from(selection));
        EvaluationReport report = evaluate(contract, bp.function_rules, GasModel{});
        json out = report_to_json(report);
        out["contract_name"] = contract.contract_name;
        out["source"] = contract.source;
        return out.dump();
    }

    std::string expected_settlement(const std::string& instance_json,
                                    const std::string& rule_id) const {
        CdmInstance instance = parse_cdm(instance_json, schemas_);
        VariableBindings bindings = apply_mapping(instance, schemas_);
        return deltas_to_json(oracle_expected_state(rule_id, bindings)).dump();
    }

    std::string settlement_rules(const std::string& type_name) const {
        const Blueprint& bp = bps_.of(contract_type_from_name(type_name));
        json out = json::object();
        for (const auto& [fn, rule] : bp.function_rules) out[fn] = rule;
        return out.dump();
    }

  private:
    SnippetLibrary lib_;
    BlueprintSet bps_;
    SchemaSet schemas_;
};

std::string generate_instances(const std::string& schema_dir, const std::string& type_name,
                               int count, std::uint64_t seed) {
    SchemaSet schemas = load_schema_dir(schema_dir);
    ContractType type = contract_type_from_name(type_name);
    json out = json::array();
    for (const CdmInstance& inst : generate_dataset(schemas, type, count, seed))
        out.push_back(json::parse(serialize_cdm(inst)));
    return out.dump();
}

std::string train_run(const std::string& config_path, std::uint64_t seed,
                      const std::string& resume) {
    RunConfig config = load_run_config(config_path);
    TrainResult result = train_loop(config, seed, resume);
    json out{{"steps", result.steps},
             {"phase_flip_step", result.phase_flip_step},
             {"phase_flip_trailing_reward", result.phase_flip_trailing_reward},
             {"final_trailing_reward", result.final_trailing_reward},
             {"metrics_path", result.metrics_path},
             {"baseline_checkpoint", result.baseline_checkpoint},
             {"final_checkpoint", result.final_checkpoint}};
    return out.dump();
}

std::string eval_policy(const std::string& config_path, const std::string& baseline,
                        const std::string& checkpoint, const std::string& emit_dir) {
    RunConfig config = load_run_config(config_path);
    EvalResult result = eval_run(config, baseline, checkpoint, emit_dir);
    json rows = json::array();
    for (const EvalRow& row : result.rows)
        rows.push_back({{"type", row.type},
                        {"model", row.model},
                        {"instances", row.instances},
                        {"compiled", row.compiled},
                        {"compile_rate", row.compile_rate},
                        {"mean_norm_gas", row.mean_norm_gas},
                        {"mean_deploy_gas", row.mean_deploy_gas},
                        {"mean_function_gas", row.mean_function_gas},
                        {"mean_reward", row.mean_reward},
                        {"delta_pct", row.delta_pct}});
    json out{{"rows", rows}, {"csv_path", result.csv_path}, {"svg_path", result.svg_path}};
    return out.dump();
}

std::string brute_force(const std::string& config_path, int max_instances) {
    RunConfig config = load_run_config(config_path);
    return brute_force_run(config, max_instances).dump();
}

} // namespace
} // namespace gascraft

PYBIND11_MODULE(_core, m) {
    using namespace gascraft;

    m.doc() = "Assembles gas-efficient settlement contracts from derivative term sheets";
    m.attr("__version__") = "0.1.0";

    py::register_exception<GascraftError>(m, "GascraftError");

    m.def("model_version", [] { return std::string(kModelVersion); });
    m.def("gas_model_version", [] { return GasModel{}.version; });

    py::class_<Workspace>(m, "Workspace")
        .def(py::init<const std::string&, const std::string&, const std::string&>(),
             py::arg("library_path"), py::arg("blueprint_path"), py::arg("schema_dir"))
        .def("contract_types", &Workspace::contract_types)
        .def("symbols", &Workspace::symbols)
        .def("action_shape", &Workspace::action_shape)
        .def("library_hash", &Workspace::library_hash)
        .def("assemble_contract", &Workspace::assemble_contract, py::arg("instance_json"),
             py::arg("selection"))
        .def("evaluate_selection", &Workspace::evaluate_selection, py::arg("instance_json"),
             py::arg("selection"))
        .def("expected_settlement", &Workspace::expected_settlement, py::arg("instance_json"),
             py::arg("rule_id"))
        .def("settlement_rules", &Workspace::settlement_rules, py::arg("type_name"));

    m.def("generate_instances", &generate_instances, py::arg("schema_dir"), py::arg("type_name"),
          py::arg("count"), py::arg("seed"));

    m.def(
        "reward_phase1",
        [](const std::string& report_json) {
            return reward_phase1(report_from_json(report_json), EnvConfig{});
        },
        py::arg("report_json"));
    m.def(
        "reward_phase2",
        [](const std::string& report_json) {
            return reward_phase2(report_from_json(report_json), EnvConfig{});
        },
        py::arg("report_json"));
    m.def(
        "normalized_gas_score",
        [](const std::string& report_json) {
            return normalized_gas_score(report_from_json(report_json), EnvConfig{});
        },
        py::arg("report_json"));

    m.def(
        "gen_data",
        [](const std::string& config_path, std::uint64_t seed) {
            cmd_gen_data(load_run_config(config_path), seed);
        },
        py::arg("config_path"), py::arg("seed"));
    m.def("train", &train_run, py::arg("config_path"), py::arg("seed"),
          py::arg("resume") = std::string());
    m.def("eval_policy", &eval_policy, py::arg("config_path"),
          py::arg("baseline") = std::string(), py::arg("checkpoint") = std::string(),
          py::arg("emit_dir") = std::string());
    m.def("brute_force", &brute_force, py::arg("config_path"), py::arg("max_instances"));
    m.def(
        "write_report",
        [](const std::string& config_path) { cmd_report(load_run_config(config_path)); },
        py::arg("config_path"));
}
