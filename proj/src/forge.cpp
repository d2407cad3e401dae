// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/forge.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

namespace gascraft {

namespace {

std::string run_command(const std::string& command, int& exit_code) {
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr)
        raise(ErrorCode::ToolchainUnavailable, "cannot spawn: " + command);
    std::string output;
    char buffer[4096];
    std::size_t n = 0;
    while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, n);
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return output;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> table_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (std::size_t i = 1; i < line.size(); ++i) {
        if (line[i] == '|') {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(line[i]);
        }
    }
    return cells;
}

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    for (const char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

std::string solidity_address(const std::string& hex) {
    return "address(uint160(" + hex + "))";
}

std::string solidity_value(const TypedValue& value, SolType type) {
    switch (value.kind) {
    case ValueKind::PartyAddress: return solidity_address(value.text);
    case ValueKind::CurrencyCode: return "\"" + value.text + "\"";
    default: break;
    }
    (void)type;
    return i128_to_string(value.num);
}

} // namespace

std::string check_toolchain(const std::string& forge_binary) {
    int exit_code = -1;
    const std::string output =
        run_command("\"" + forge_binary + "\" --version 2>&1", exit_code);
    if (exit_code != 0 || output.empty())
        raise(ErrorCode::ToolchainUnavailable,
              forge_binary + " --version failed; install foundry or use --evaluator builtin");
    return trim(split_lines(output).front());
}

void emit_workspace(const std::string& dir, const AssembledContract& contract,
                    const std::map<std::string, std::string>& function_rules) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "src");
    fs::create_directories(fs::path(dir) / "test");

    write_file(fs::path(dir) / "foundry.toml",
               "[profile.default]\n"
               "src = \"src\"\n"
               "out = \"out\"\n"
               "libs = [\"lib\"]\n"
               "solc_version = \"0.8.19\"\n"
               "optimizer = true\n"
               "optimizer_runs = 200\n");
    write_file(fs::path(dir) / "src" / "Contract.sol", contract.source);

    VariableBindings values;
    for (const StateVariable& var : contract.variables)
        values.ordered.emplace_back(var.name, var.value);

    std::ostringstream t;
    t << "// SPDX-License-Identifier: UNLICENSED\n";
    t << "pragma solidity ^0.8.19;\n\n";
    t << "import {Test} from \"forge-std/Test.sol\";\n";
    t << "import {" << contract.contract_name << "} from \"../src/Contract.sol\";\n\n";
    t << "contract " << contract.contract_name << "Test is Test {\n";
    t << "    " << contract.contract_name << " c;\n\n";
    t << "    function setUp() public {\n";
    t << "        c = new " << contract.contract_name << "(";
    for (std::size_t i = 0; i < contract.constructor_params.size(); ++i) {
        const ConstructorParam& p = contract.constructor_params[i];
        if (i > 0) t << ", ";
        t << solidity_value(p.value, p.type);
    }
    t << ");\n    }\n";

    for (const AssembledFunction& fn : contract.functions) {
        const auto rule = function_rules.find(fn.name);
        if (rule == function_rules.end())
            raise(ErrorCode::UnknownSettlementRule, "no rule bound for " + fn.name);
        const BalanceDeltas expected = oracle_expected_state(rule->second, values);
        t << "\n    function test_" << fn.name << "() public {\n";
        t << "        c." << fn.name << "();\n";
        for (const auto& [address, delta] : expected)
            t << "        assertEq(c.balances(" << solidity_address(address)
              << "), int256(" << i128_to_string(delta) << "));\n";
        t << "    }\n";
    }
    t << "}\n";
    write_file(fs::path(dir) / "test" / "Contract.t.sol", t.str());
}

ForgeRunResult parse_forge_output(const std::string& output) {
    ForgeRunResult result;
    if (output.find("Compiler run failed") != std::string::npos) {
        result.compile_ok = false;
        std::size_t pos = 0;
        while ((pos = output.find("Error (", pos)) != std::string::npos) {
            result.compiler_errors += 1;
            pos += 7;
        }
        if (result.compiler_errors == 0) result.compiler_errors = 1;
        return result;
    }
    if (output.find("Compiler run successful") == std::string::npos &&
        output.find("[PASS]") == std::string::npos &&
        output.find("[FAIL") == std::string::npos)
        raise(ErrorCode::UnparsableOutput, "no compiler or test markers in forge output");
    result.compile_ok = true;

    for (const std::string& raw : split_lines(output)) {
        const std::string line = trim(raw);
        const bool pass = line.rfind("[PASS]", 0) == 0;
        const bool fail = line.rfind("[FAIL", 0) == 0;
        if (pass || fail) {
            const auto name_begin = line.find("test_");
            const auto name_end = line.find('(', name_begin);
            if (name_begin == std::string::npos || name_end == std::string::npos) continue;
            const std::string name =
                line.substr(name_begin + 5, name_end - name_begin - 5);
            result.test_passed[name] = pass;
            continue;
        }
        if (!line.empty() && line.front() == '|') {
            const auto cells = table_cells(line);
            if (cells.size() >= 2 && is_number(cells[0]) && is_number(cells[1]) &&
                result.deploy_gas == 0) {
                result.deploy_gas = std::stoll(cells[0]);
                continue;
            }
            if (cells.size() >= 6 && !cells[0].empty() && is_number(cells[1]) &&
                is_number(cells[4]))
                result.function_gas[cells[0]] = std::stoll(cells[4]);
        }
    }
    if (result.test_passed.empty() && result.function_gas.empty())
        raise(ErrorCode::UnparsableOutput, "forge output carried no test results");
    return result;
}

ForgeEvaluator::ForgeEvaluator(ForgeConfig config) : config_(std::move(config)) {
    version_ = check_toolchain(config_.forge_binary);
}

EvaluationReport ForgeEvaluator::run(const AssembledContract& contract,
                                     const std::map<std::string, std::string>& function_rules) {
    emit_workspace(config_.workspace_dir, contract, function_rules);

    std::ostringstream cmd;
    cmd << "cd \"" << config_.workspace_dir << "\" && timeout "
        << config_.timeout_seconds << " \"" << config_.forge_binary
        << "\" test --gas-report 2>&1";
    int exit_code = -1;
    const std::string output = run_command(cmd.str(), exit_code);
    if (exit_code == 124)
        raise(ErrorCode::ToolchainTimeout,
              "forge test exceeded " + std::to_string(config_.timeout_seconds) + "s");

    const ForgeRunResult parsed = parse_forge_output(output);
    EvaluationReport report;
    report.model_version = version_;
    report.compile_ok = parsed.compile_ok;
    if (!parsed.compile_ok) {
        report.distinct_errors = parsed.compiler_errors;
        report.static_errors.push_back(
            {ErrorClass::MalformedFragment, "external",
             std::to_string(parsed.compiler_errors) + " compiler errors"});
        return report;
    }
    report.deploy_gas = parsed.deploy_gas;
    for (const AssembledFunction& fn : contract.functions) {
        FunctionReport fn_report;
        fn_report.name = fn.name;
        const auto gas = parsed.function_gas.find(fn.name);
        fn_report.gas = gas == parsed.function_gas.end() ? 0 : gas->second;
        const auto passed = parsed.test_passed.find(fn.name);
        fn_report.passed = passed != parsed.test_passed.end() && passed->second;
        fn_report.reverted = !fn_report.passed;
        report.functions_passed += fn_report.passed ? 1 : 0;
        report.functions.push_back(std::move(fn_report));
    }
    return report;
}

std::unique_ptr<ContractEvaluator> make_evaluator(const std::string& name,
                                                  const GasModel& model,
                                                  const ForgeConfig& forge_config) {
    if (name == "builtin") return std::make_unique<BuiltinEvaluator>(model);
    if (name == "external") return std::make_unique<ForgeEvaluator>(forge_config);
    raise(ErrorCode::ConfigError, "unknown evaluator " + name +
          " (expected builtin or external)");
}

} // namespace gascraft
