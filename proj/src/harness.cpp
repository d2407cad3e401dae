// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gascraft/rng.hpp"
#include "gascraft/synthesize.hpp"

namespace gascraft {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) raise(ErrorCode::IoError, "cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::ofstream os(target, std::ios::binary | std::ios::trunc);
    if (!os) raise(ErrorCode::IoError, "cannot write " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) raise(ErrorCode::IoError, "short write to " + path);
}

std::string resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path candidate(p);
    if (candidate.is_absolute()) return candidate.lexically_normal().string();
    return (base / candidate).lexically_normal().string();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(known.begin(), known.end(), [&key](const char* k) {
                return key == k;
            }) == known.end())
            raise(ErrorCode::ConfigError, "unknown key \"" + key + "\" in " + where);
    }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string csv_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string type_name(ContractType t) { return std::string(contract_type_name(t)); }

constexpr const char* kMetricsHeader = "step,phase,reward,compile_success,norm_gas,entropy_coef\n";

// Mean of the numeric feature slots so chart scales stay comparable.
struct Series {
    std::string label;
    std::vector<double> xs, ys;
};

std::string svg_header(int w, int h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    return os.str();
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& note) {
    const int w = 880, h = 440, ml = 70, mr = 20, mt = 50, mb = 45;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool first = true;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (first) {
                x_lo = x_hi = s.xs[i];
                y_lo = y_hi = s.ys[i];
                first = false;
            }
            x_lo = std::min(x_lo, s.xs[i]);
            x_hi = std::max(x_hi, s.xs[i]);
            y_lo = std::min(y_lo, s.ys[i]);
            y_hi = std::max(y_hi, s.ys[i]);
        }
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;
    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb); };

    std::ostringstream os;
    os << svg_header(w, h);
    os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"16\">" << title << "</text>\n";
    os << "<text x=\"" << w - mr << "\" y=\"40\" text-anchor=\"end\" font-family=\"sans-serif\""
       << " font-size=\"11\" fill=\"#555\">" << note << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
       << h - mb << "\" stroke=\"#333\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
       << "\" stroke=\"#333\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = x_lo + (x_hi - x_lo) * tick / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * tick / 4.0;
        os << "<text x=\"" << px(fx) << "\" y=\"" << h - mb + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
           << static_cast<long long>(fx) << "</text>\n";
        char fy_buf[32];
        std::snprintf(fy_buf, sizeof fy_buf, "%.2f", fy);
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fy_buf
           << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kSeriesColors[s % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].xs.size(); ++i)
            os << px(series[s].xs[i]) << "," << py(series[s].ys[i]) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 * (s + 1)
           << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
           << series[s].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

struct Bar {
    std::string group;
    double a = 0.0, b = 0.0;
};

// Grouped two-series bars, or single wide bars when label_b is empty.
std::string svg_bar_chart(const std::vector<Bar>& bars, const std::string& label_a,
                          const std::string& label_b, const std::string& title) {
    const int w = 880, h = 440, ml = 70, mr = 20, mt = 50, mb = 60;
    const bool two_series = !label_b.empty();
    double y_hi = 0.0;
    for (const Bar& bar : bars) y_hi = std::max({y_hi, bar.a, two_series ? bar.b : 0.0});
    if (y_hi <= 0.0) y_hi = 1.0;
    const double span = static_cast<double>(w - ml - mr);
    const double group_w = span / std::max<std::size_t>(bars.size(), 1);
    auto py = [&](double y) { return h - mb - y / y_hi * (h - mt - mb); };

    std::ostringstream os;
    os << svg_header(w, h);
    os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"16\">" << title << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
       << h - mb << "\" stroke=\"#333\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
       << "\" stroke=\"#333\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double fy = y_hi * tick / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", fy);
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << buf
           << "</text>\n";
    }
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double x0 = ml + group_w * static_cast<double>(i);
        if (two_series) {
            const double bw = group_w * 0.3;
            os << "<rect x=\"" << x0 + group_w * 0.15 << "\" y=\"" << py(bars[i].a)
               << "\" width=\"" << bw << "\" height=\"" << (h - mb - py(bars[i].a))
               << "\" fill=\"" << kSeriesColors[0] << "\"/>\n";
            os << "<rect x=\"" << x0 + group_w * 0.55 << "\" y=\"" << py(bars[i].b)
               << "\" width=\"" << bw << "\" height=\"" << (h - mb - py(bars[i].b))
               << "\" fill=\"" << kSeriesColors[1] << "\"/>\n";
        } else {
            const double bw = group_w * 0.6;
            os << "<rect x=\"" << x0 + group_w * 0.2 << "\" y=\"" << py(bars[i].a)
               << "\" width=\"" << bw << "\" height=\"" << (h - mb - py(bars[i].a))
               << "\" fill=\"" << kSeriesColors[0] << "\"/>\n";
        }
        os << "<text x=\"" << x0 + group_w / 2 << "\" y=\"" << h - mb + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << bars[i].group << "</text>\n";
    }
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << kSeriesColors[0] << "\">"
       << label_a << "</text>\n";
    if (two_series)
        os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 32
           << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << kSeriesColors[1]
           << "\">" << label_b << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

json config_digest(const RunConfig& c) {
    return json{{"library", c.library_path},
                {"blueprints", c.blueprint_path},
                {"schemas", c.schema_dir},
                {"dataset_dir", c.dataset_dir},
                {"out_dir", c.out_dir},
                {"evaluator", c.evaluator},
                {"dataset", {{"train_per_type", c.dataset.train_per_type},
                             {"test_per_type", c.dataset.test_per_type}}},
                {"env",
                 {{"success_bonus", c.env.success_bonus},
                  {"failure_base", c.env.failure_base},
                  {"per_error_penalty", c.env.per_error_penalty},
                  {"max_counted_errors", c.env.max_counted_errors},
                  {"compile_fail_penalty", c.env.compile_fail_penalty},
                  {"reward_scale", c.env.reward_scale},
                  {"deploy_weight", c.env.deploy_weight},
                  {"function_weight", c.env.function_weight},
                  {"deploy_gas_budget", c.env.deploy_gas_budget},
                  {"function_gas_budget", c.env.function_gas_budget}}},
                {"ppo",
                 {{"learning_rate", c.ppo.learning_rate},
                  {"clip_ratio", c.ppo.clip_ratio},
                  {"value_coef", c.ppo.value_coef},
                  {"entropy_coef_start", c.ppo.entropy_coef_start},
                  {"entropy_coef_end", c.ppo.entropy_coef_end},
                  {"entropy_horizon", c.ppo.entropy_horizon},
                  {"epochs", c.ppo.epochs},
                  {"minibatch_size", c.ppo.minibatch_size},
                  {"gamma", c.ppo.gamma},
                  {"gae_lambda", c.ppo.gae_lambda}}},
                {"train",
                 {{"batch_size", c.train.batch_size},
                  {"hidden", c.train.hidden},
                  {"phase1_max_steps", c.train.phase1_max_steps},
                  {"phase2_steps", c.train.phase2_steps},
                  {"phase_gate", c.train.phase_gate},
                  {"phase_window", c.train.phase_window},
                  {"log_every", c.train.log_every},
                  {"checkpoint_every", c.train.checkpoint_every},
                  {"reward_div", c.train.reward_div}}}};
}

std::vector<std::uint8_t> entropy_mask(const AssemblyEnv& env) {
    return std::vector<std::uint8_t>(env.active_symbols().begin(), env.active_symbols().end());
}

struct GreedyOutcome {
    StepResult step;
    bool ok = false;
};

GreedyOutcome greedy_episode(AssemblyEnv& env, const PolicyNet& net,
                             const CdmInstance& instance) {
    env.clear_feedback();
    std::vector<double> obs = env.reset(instance);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(),
                                                          static_cast<long>(obs.size()));
    Forward fwd = forward(net, x);
    GreedyOutcome out;
    out.step = env.step(greedy_action(fwd));
    out.ok = out.step.report.compile_ok;
    return out;
}

} // namespace

std::string format_metrics_row(const MetricsRow& row) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld,%d,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<long long>(row.step), row.phase, row.reward, row.compile_success,
                  row.norm_gas, row.entropy_coef);
    return buf;
}

RunConfig load_run_config(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigError, path + ": " + e.what());
    }
    if (!doc.is_object()) raise(ErrorCode::ConfigError, path + ": config must be an object");
    reject_unknown_keys(doc,
                        {"library", "blueprints", "schemas", "dataset_dir", "out_dir",
                         "evaluator", "forge", "dataset", "env", "ppo", "train"},
                        path);

    const fs::path base = fs::path(path).parent_path();
    RunConfig c;
    try {
        std::string raw;
        maybe(doc, "library", raw);
        c.library_path = resolve(base, raw);
        raw.clear();
        maybe(doc, "blueprints", raw);
        c.blueprint_path = resolve(base, raw);
        raw.clear();
        maybe(doc, "schemas", raw);
        c.schema_dir = resolve(base, raw);
        raw.clear();
        maybe(doc, "dataset_dir", raw);
        c.dataset_dir = resolve(base, raw);
        raw.clear();
        maybe(doc, "out_dir", raw);
        c.out_dir = resolve(base, raw);
        maybe(doc, "evaluator", c.evaluator);

        if (doc.contains("forge")) {
            const json& f = doc["forge"];
            reject_unknown_keys(f, {"forge_binary", "workspace_dir", "timeout_seconds"},
                                path + " forge");
            maybe(f, "forge_binary", c.forge.forge_binary);
            std::string ws = c.forge.workspace_dir;
            maybe(f, "workspace_dir", ws);
            c.forge.workspace_dir = resolve(base, ws);
            maybe(f, "timeout_seconds", c.forge.timeout_seconds);
        }
        if (doc.contains("dataset")) {
            const json& d = doc["dataset"];
            reject_unknown_keys(d, {"train_per_type", "test_per_type"}, path + " dataset");
            maybe(d, "train_per_type", c.dataset.train_per_type);
            maybe(d, "test_per_type", c.dataset.test_per_type);
        }
        if (doc.contains("env")) {
            const json& e = doc["env"];
            reject_unknown_keys(e,
                                {"success_bonus", "failure_base", "per_error_penalty",
                                 "max_counted_errors", "compile_fail_penalty", "reward_scale",
                                 "deploy_weight", "function_weight", "deploy_gas_budget",
                                 "function_gas_budget"},
                                path + " env");
            maybe(e, "success_bonus", c.env.success_bonus);
            maybe(e, "failure_base", c.env.failure_base);
            maybe(e, "per_error_penalty", c.env.per_error_penalty);
            maybe(e, "max_counted_errors", c.env.max_counted_errors);
            maybe(e, "compile_fail_penalty", c.env.compile_fail_penalty);
            maybe(e, "reward_scale", c.env.reward_scale);
            maybe(e, "deploy_weight", c.env.deploy_weight);
            maybe(e, "function_weight", c.env.function_weight);
            maybe(e, "deploy_gas_budget", c.env.deploy_gas_budget);
            maybe(e, "function_gas_budget", c.env.function_gas_budget);
        }
        if (doc.contains("ppo")) {
            const json& p = doc["ppo"];
            reject_unknown_keys(p,
                                {"learning_rate", "clip_ratio", "value_coef",
                                 "entropy_coef_start", "entropy_coef_end", "entropy_horizon",
                                 "epochs", "minibatch_size", "gamma", "gae_lambda"},
                                path + " ppo");
            maybe(p, "learning_rate", c.ppo.learning_rate);
            maybe(p, "clip_ratio", c.ppo.clip_ratio);
            maybe(p, "value_coef", c.ppo.value_coef);
            maybe(p, "entropy_coef_start", c.ppo.entropy_coef_start);
            maybe(p, "entropy_coef_end", c.ppo.entropy_coef_end);
            maybe(p, "entropy_horizon", c.ppo.entropy_horizon);
            maybe(p, "epochs", c.ppo.epochs);
            maybe(p, "minibatch_size", c.ppo.minibatch_size);
            maybe(p, "gamma", c.ppo.gamma);
            maybe(p, "gae_lambda", c.ppo.gae_lambda);
        }
        if (doc.contains("train")) {
            const json& t = doc["train"];
            reject_unknown_keys(t,
                                {"batch_size", "hidden", "phase1_max_steps", "phase2_steps",
                                 "phase_gate", "phase_window", "log_every", "checkpoint_every",
                                 "reward_div"},
                                path + " train");
            maybe(t, "batch_size", c.train.batch_size);
            maybe(t, "hidden", c.train.hidden);
            maybe(t, "phase1_max_steps", c.train.phase1_max_steps);
            maybe(t, "phase2_steps", c.train.phase2_steps);
            maybe(t, "phase_gate", c.train.phase_gate);
            maybe(t, "phase_window", c.train.phase_window);
            maybe(t, "log_every", c.train.log_every);
            maybe(t, "checkpoint_every", c.train.checkpoint_every);
            maybe(t, "reward_div", c.train.reward_div);
        }
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigError, path + ": " + e.what());
    }

    if (c.library_path.empty() || c.blueprint_path.empty() || c.schema_dir.empty() ||
        c.dataset_dir.empty() || c.out_dir.empty())
        raise(ErrorCode::ConfigError,
              path + ": library, blueprints, schemas, dataset_dir and out_dir are required");
    if (c.evaluator != "builtin" && c.evaluator != "external")
        raise(ErrorCode::ConfigError, "evaluator must be builtin or external, got " + c.evaluator);
    if (c.train.batch_size <= 0 || c.train.log_every <= 0 || c.train.phase_window <= 0 ||
        c.train.reward_div <= 0.0)
        raise(ErrorCode::ConfigError, path + ": train parameters must be positive");

    c.config_hash = hex64(fnv1a(config_digest(c).dump()));
    return c;
}

World load_world(const RunConfig& config) {
    World world;
    world.lib = load_library(config.library_path);
    world.bps = load_blueprints(config.blueprint_path, world.lib);
    world.schemas = load_schema_dir(config.schema_dir);
    world.evaluator = make_evaluator(config.evaluator, GasModel{}, config.forge);
    for (int t = 0; t < kContractTypeCount; ++t)
        if (world.bps.present[static_cast<std::size_t>(t)])
            world.types.push_back(static_cast<ContractType>(t));
    if (world.types.empty())
        raise(ErrorCode::ConfigError, "blueprint file covers no contract types");
    return world;
}

std::vector<CdmInstance> load_dataset(const RunConfig& config, const World& world,
                                      const std::string& split) {
    std::vector<CdmInstance> out;
    for (ContractType type : world.types) {
        const fs::path dir = fs::path(config.dataset_dir) / split / type_name(type);
        if (!fs::is_directory(dir))
            raise(ErrorCode::IoError,
                  "missing dataset directory " + dir.string() + " (run gen-data first)");
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        for (const std::string& file : files)
            out.push_back(parse_cdm(read_file(file), world.schemas));
    }
    if (out.empty()) raise(ErrorCode::IoError, "dataset split " + split + " is empty");
    return out;
}

int cmd_gen_data(const RunConfig& config, std::uint64_t seed) {
    World world = load_world(config);
    json manifest = {{"seed", seed}, {"splits", json::object()}};
    for (const std::string& split : {std::string("train"), std::string("test")}) {
        const int count = split == "train" ? config.dataset.train_per_type
                                           : config.dataset.test_per_type;
        json& split_counts = manifest["splits"][split];
        for (ContractType type : world.types) {
            const std::uint64_t split_seed = derive_seed(seed, split + "/" + type_name(type));
            std::vector<CdmInstance> data =
                generate_dataset(world.schemas, type, count, split_seed);
            for (const CdmInstance& instance : data) {
                const fs::path file = fs::path(config.dataset_dir) / split / type_name(type) /
                                      (instance.id + ".json");
                write_file(file.string(), serialize_cdm(instance));
            }
            split_counts[type_name(type)] = count;
            std::cout << "gen-data: " << split << "/" << type_name(type) << " " << count
                      << " instances\n";
        }
    }
    write_file(config.dataset_dir + "/manifest.json", manifest.dump(2) + "\n");
    return 0;
}

TrainResult train_loop(const RunConfig& config, std::uint64_t seed,
                       const std::string& resume_path) {
    World world = load_world(config);
    std::vector<CdmInstance> train_set = load_dataset(config, world, "train");

    AssemblyEnv env(world.lib, world.bps, world.schemas, *world.evaluator, config.env);
    const std::vector<int> head_sizes = env.action_shape();

    std::mt19937_64 sampler_rng(derive_seed(seed, "sampler"));
    std::mt19937_64 action_rng(derive_seed(seed, "action"));
    std::mt19937_64 update_rng(derive_seed(seed, "update"));

    PolicyNet net = PolicyNet::init(env.observation_width(), head_sizes,
                                    derive_seed(seed, "net"), config.train.hidden);
    Adam adam = Adam::init(net);

    std::int64_t step = 0;
    std::int64_t phase_flip_step = -1;
    std::deque<int> trailing;
    std::deque<double> trailing_reward;
    auto trailing_reward_mean = [&] {
        if (trailing_reward.empty()) return 0.0;
        double sum = 0.0;
        for (double r : trailing_reward) sum += r;
        return sum / static_cast<double>(trailing_reward.size());
    };

    TrainResult result;
    result.metrics_path = config.metrics_path();
    result.baseline_checkpoint = config.checkpoint_dir() + "/baseline.ckpt";
    result.final_checkpoint = config.checkpoint_dir() + "/final.ckpt";

    auto rng_states = [&] {
        auto text = [](const std::mt19937_64& r) {
            std::ostringstream os;
            os << r;
            return os.str();
        };
        return json{{"sampler", text(sampler_rng)},
                    {"action", text(action_rng)},
                    {"update", text(update_rng)}};
    };
    auto metadata = [&](int phase) {
        json trail = json::array();
        for (int v : trailing) trail.push_back(v);
        json trail_reward = json::array();
        for (double r : trailing_reward) trail_reward.push_back(r);
        return json{{"step", step},
                    {"phase", phase},
                    {"phase_flip_step", phase_flip_step},
                    {"config_hash", config.config_hash},
                    {"seed", seed},
                    {"rng", rng_states()},
                    {"trailing", trail},
                    {"trailing_reward", trail_reward}};
    };

    if (resume_path.empty()) {
        fs::create_directories(config.checkpoint_dir());
        save_checkpoint(result.baseline_checkpoint, net, adam, metadata(1));
        write_file(result.metrics_path, kMetricsHeader);
    } else {
        CheckpointData data = load_checkpoint(resume_path);
        ensure_compatible(data.net, env.observation_width(), head_sizes);
        if (data.metadata.value("config_hash", "") != config.config_hash)
            raise(ErrorCode::ConfigError,
                  "checkpoint " + resume_path + " was trained under a different config");
        net = std::move(data.net);
        adam = std::move(data.adam);
        step = data.metadata.value("step", std::int64_t{0});
        phase_flip_step = data.metadata.value("phase_flip_step", std::int64_t{-1});
        env.set_phase(data.metadata.value("phase", 1));
        std::istringstream(data.metadata["rng"]["sampler"].get<std::string>()) >> sampler_rng;
        std::istringstream(data.metadata["rng"]["action"].get<std::string>()) >> action_rng;
        std::istringstream(data.metadata["rng"]["update"].get<std::string>()) >> update_rng;
        trailing.clear();
        for (const auto& v : data.metadata.value("trailing", json::array()))
            trailing.push_back(v.get<int>());
        trailing_reward.clear();
        for (const auto& v : data.metadata.value("trailing_reward", json::array()))
            trailing_reward.push_back(v.get<double>());
        if (!fs::exists(result.metrics_path)) write_file(result.metrics_path, kMetricsHeader);
    }

    std::ofstream metrics(result.metrics_path, std::ios::app);
    if (!metrics) raise(ErrorCode::IoError, "cannot append " + result.metrics_path);

    std::vector<Transition> buffer;
    std::vector<bool> dones;
    buffer.reserve(static_cast<std::size_t>(config.train.batch_size));

    double window_reward = 0.0, window_norm = 0.0;
    int window_success = 0, window_n = 0;

    auto run_update = [&] {
        if (buffer.empty()) return;
        compute_gae(buffer, dones, config.ppo.gamma, config.ppo.gae_lambda);
        ppo_update(net, adam, buffer, config.ppo, step, update_rng);
        buffer.clear();
        dones.clear();
    };

    auto total_steps = [&] {
        const std::int64_t p1_end = phase_flip_step >= 0 ? phase_flip_step
                                                         : config.train.phase1_max_steps;
        return p1_end + config.train.phase2_steps;
    };

    while (step < total_steps()) {
        const CdmInstance& instance = train_set[static_cast<std::size_t>(
            rng_int(sampler_rng, 0, static_cast<std::int64_t>(train_set.size()) - 1))];
        std::vector<double> obs = env.reset(instance);
        Eigen::VectorXd x =
            Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<long>(obs.size()));
        Forward fwd = forward(net, x);

        Transition t;
        t.obs = x;
        t.action = sample_action(fwd, action_rng);
        t.mask = entropy_mask(env);
        t.log_prob = action_log_prob(fwd, t.action);
        t.value = fwd.value;

        StepResult sr = env.step(t.action);
        t.reward = sr.reward / config.train.reward_div;
        buffer.push_back(std::move(t));
        dones.push_back(true);
        ++step;

        window_reward += sr.reward;
        window_norm += sr.norm_gas;
        window_success += sr.report.compile_ok ? 1 : 0;
        ++window_n;

        trailing.push_back(sr.report.compile_ok ? 1 : 0);
        while (static_cast<int>(trailing.size()) > config.train.phase_window)
            trailing.pop_front();
        trailing_reward.push_back(sr.reward);
        while (static_cast<int>(trailing_reward.size()) > config.train.phase_window)
            trailing_reward.pop_front();

        if (static_cast<int>(buffer.size()) >= config.train.batch_size) run_update();

        if (step % config.train.log_every == 0 && window_n > 0) {
            MetricsRow row;
            row.step = step;
            row.phase = env.phase();
            row.reward = window_reward / window_n;
            row.compile_success = static_cast<double>(window_success) / window_n;
            row.norm_gas = window_norm / window_n;
            row.entropy_coef = entropy_coef_at(config.ppo, step);
            metrics << format_metrics_row(row);
            metrics.flush();
            result.rows.push_back(row);
            window_reward = window_norm = 0.0;
            window_success = window_n = 0;
        }

        if (env.phase() == 1) {
            const bool window_full =
                static_cast<int>(trailing.size()) >= config.train.phase_window;
            double rate = 0.0;
            if (window_full) {
                int hits = 0;
                for (int v : trailing) hits += v;
                rate = static_cast<double>(hits) / static_cast<double>(trailing.size());
            }
            if ((window_full && rate >= config.train.phase_gate) ||
                step >= config.train.phase1_max_steps) {
                run_update();
                phase_flip_step = step;
                result.phase_flip_trailing_reward = trailing_reward_mean();
                env.set_phase(2);
                save_checkpoint(config.checkpoint_dir() + "/phase1.ckpt", net, adam,
                                metadata(2));
                std::cout << "train: phase 2 from step " << step << " (success rate "
                          << csv_double(rate) << ")\n";
            }
        }

        if (config.train.checkpoint_every > 0 && step % config.train.checkpoint_every == 0) {
            run_update();
            save_checkpoint(config.checkpoint_dir() + "/latest.ckpt", net, adam,
                            metadata(env.phase()));
        }
    }

    run_update();
    save_checkpoint(result.final_checkpoint, net, adam, metadata(env.phase()));
    result.steps = step;
    result.phase_flip_step = phase_flip_step;
    result.final_trailing_reward = trailing_reward_mean();
    return result;
}

int cmd_train(const RunConfig& config, std::uint64_t seed, const std::string& resume_path) {
    TrainResult result = train_loop(config, seed, resume_path);
    std::cout << "train: " << result.steps << " steps, phase flip at "
              << result.phase_flip_step << "\n";
    std::cout << "train: metrics " << result.metrics_path << "\n";
    std::cout << "train: final checkpoint " << result.final_checkpoint << "\n";
    return 0;
}

EvalResult eval_run(const RunConfig& config, const std::string& baseline_override,
                    const std::string& final_override, const std::string& emit_dir) {
    World world = load_world(config);
    std::vector<CdmInstance> test_set = load_dataset(config, world, "test");

    const std::string baseline_path = baseline_override.empty()
                                          ? config.checkpoint_dir() + "/phase1.ckpt"
                                          : baseline_override;
    const std::string final_path = final_override.empty()
                                       ? config.checkpoint_dir() + "/final.ckpt"
                                       : final_override;

    AssemblyEnv env(world.lib, world.bps, world.schemas, *world.evaluator, config.env);
    env.set_phase(2);

    EvalResult result;
    result.csv_path = config.out_dir + "/eval.csv";
    result.svg_path = config.out_dir + "/eval.svg";

    struct Accum {
        int instances = 0, compiled = 0;
        double norm = 0.0, deploy = 0.0, fn_gas = 0.0, reward = 0.0;
        int fn_count = 0;
    };

    for (const auto& [model, path] : std::vector<std::pair<std::string, std::string>>{
             {"baseline", baseline_path}, {"final", final_path}}) {
        CheckpointData ckpt = load_checkpoint(path);
        ensure_compatible(ckpt.net, env.observation_width(), env.action_shape());

        std::map<std::string, Accum> per_type;
        for (const CdmInstance& instance : test_set) {
            GreedyOutcome outcome = greedy_episode(env, ckpt.net, instance);
            Accum& acc = per_type[type_name(instance.type)];
            ++acc.instances;
            acc.reward += outcome.step.reward;
            if (outcome.ok) {
                ++acc.compiled;
                acc.norm += outcome.step.norm_gas;
                acc.deploy += outcome.step.report.deploy_gas;
                for (const FunctionReport& fn : outcome.step.report.functions) {
                    acc.fn_gas += fn.gas;
                    ++acc.fn_count;
                }
            }
            if (model == "final" && !emit_dir.empty()) {
                const fs::path file = fs::path(emit_dir) / type_name(instance.type) /
                                      (instance.id + ".sol");
                write_file(file.string(), outcome.step.contract.source);
            }
        }

        for (const auto& [type, acc] : per_type) {
            EvalRow row;
            row.type = type;
            row.model = model;
            row.instances = acc.instances;
            row.compiled = acc.compiled;
            row.compile_rate = acc.instances > 0
                                   ? static_cast<double>(acc.compiled) / acc.instances
                                   : 0.0;
            row.mean_norm_gas = acc.compiled > 0 ? acc.norm / acc.compiled : 0.0;
            row.mean_deploy_gas = acc.compiled > 0 ? acc.deploy / acc.compiled : 0.0;
            row.mean_function_gas = acc.fn_count > 0 ? acc.fn_gas / acc.fn_count : 0.0;
            row.mean_reward = acc.instances > 0 ? acc.reward / acc.instances : 0.0;
            result.rows.push_back(row);
        }
    }

    // Mean gas reduction of the final model against the phase 1 baseline.
    std::vector<Bar> bars;
    for (EvalRow& row : result.rows) {
        if (row.model != "final") continue;
        for (const EvalRow& base : result.rows) {
            if (base.model != "baseline" || base.type != row.type) continue;
            if (base.mean_norm_gas > 0.0)
                row.delta_pct =
                    (base.mean_norm_gas - row.mean_norm_gas) / base.mean_norm_gas * 100.0;
            bars.push_back({row.type, row.delta_pct, 0.0});
        }
    }

    std::ostringstream csv;
    csv << "type,model,instances,compiled,compile_rate,mean_norm_gas,mean_deploy_gas,"
           "mean_function_gas,mean_reward,delta_pct\n";
    for (const EvalRow& row : result.rows)
        csv << row.type << "," << row.model << "," << row.instances << "," << row.compiled
            << "," << csv_double(row.compile_rate) << "," << csv_double(row.mean_norm_gas)
            << "," << csv_double(row.mean_deploy_gas) << ","
            << csv_double(row.mean_function_gas) << "," << csv_double(row.mean_reward) << ","
            << csv_double(row.delta_pct) << "\n";
    write_file(result.csv_path, csv.str());
    write_file(result.svg_path,
               svg_bar_chart(bars, "gas reduction %", "",
                             "Normalized gas reduction vs phase 1 baseline"));
    return result;
}

int cmd_eval(const RunConfig& config, const std::string& baseline_override,
             const std::string& final_override, const std::string& emit_dir) {
    EvalResult result = eval_run(config, baseline_override, final_override, emit_dir);
    for (const EvalRow& row : result.rows) {
        std::cout << "eval: " << row.type << " " << row.model << " compile_rate="
                  << csv_double(row.compile_rate) << " norm_gas="
                  << csv_double(row.mean_norm_gas);
        if (row.model == "final") std::cout << " delta_pct=" << csv_double(row.delta_pct);
        std::cout << "\n";
    }
    std::cout << "eval: wrote " << result.csv_path << " and " << result.svg_path << "\n";
    return 0;
}

nlohmann::json brute_force_run(const RunConfig& config, int max_instances,
                               std::int64_t max_selections) {
    World world = load_world(config);
    std::vector<CdmInstance> test_set = load_dataset(config, world, "test");
    if (max_instances > 0 && static_cast<int>(test_set.size()) > max_instances)
        test_set.resize(static_cast<std::size_t>(max_instances));

    const GasModel model;
    const std::string cache_path = config.out_dir + "/brute_force.json";
    json cache = json::object();
    if (fs::exists(cache_path)) {
        try {
            cache = json::parse(read_file(cache_path));
        } catch (const json::exception&) {
            cache = json::object();
        }
        if (cache.value("library_hash", "") != hex64(world.lib.content_hash) ||
            cache.value("gas_model_hash", "") != hex64(model.hash()))
            cache = json::object();
    }

    json out = {{"library_hash", hex64(world.lib.content_hash)},
                {"gas_model", model.version},
                {"gas_model_hash", hex64(model.hash())},
                {"instances", json::object()}};
    int hits = 0, computed = 0;

    for (const CdmInstance& instance : test_set) {
        if (cache.contains("instances") && cache["instances"].contains(instance.id)) {
            out["instances"][instance.id] = cache["instances"][instance.id];
            ++hits;
            continue;
        }
        const Blueprint& bp = world.bps.of(instance.type);
        std::int64_t space = 1;
        for (int idx : bp.required) {
            space *= static_cast<std::int64_t>(world.lib.variants(idx).size());
            if (space > max_selections)
                raise(ErrorCode::SpaceTooLarge,
                      "selection space for " + instance.id + " exceeds " +
                          std::to_string(max_selections));
        }

        VariableBindings bindings = apply_mapping(instance, world.schemas);
        SnippetSelection selection;
        selection.variant.assign(static_cast<std::size_t>(world.lib.symbol_count()), 0);
        std::vector<int> counter(bp.required.size(), 0);

        double best_score = 2.0; // above any reachable gas fraction
        json best = nullptr;
        std::int64_t evaluated = 0, full_pass = 0;
        bool rolled_over = false;
        while (!rolled_over) {
            for (std::size_t i = 0; i < counter.size(); ++i)
                selection.variant[static_cast<std::size_t>(bp.required[i])] = counter[i];
            AssembledContract contract =
                assemble(world.lib, bp, instance.id, bindings, selection);
            EvaluationReport report = evaluate(contract, bp.function_rules, model);
            ++evaluated;
            const bool all_passed =
                report.compile_ok &&
                report.functions_passed == static_cast<int>(report.functions.size());
            if (all_passed) {
                ++full_pass;
                const double score = normalized_gas_score(report, config.env);
                if (score < best_score) {
                    best_score = score;
                    json sel = json::object();
                    for (std::size_t i = 0; i < counter.size(); ++i)
                        sel[world.lib.symbol(bp.required[i]).name] = counter[i];
                    json fn_gas = json::object();
                    for (const FunctionReport& fn : report.functions)
                        fn_gas[fn.name] = fn.gas;
                    best = {{"selection", sel},
                            {"score", score},
                            {"deploy_gas", report.deploy_gas},
                            {"function_gas", fn_gas}};
                }
            }

            rolled_over = true;
            for (std::size_t i = 0; i < counter.size(); ++i) {
                const int limit =
                    static_cast<int>(world.lib.variants(bp.required[i]).size());
                if (++counter[i] < limit) {
                    rolled_over = false;
                    break;
                }
                counter[i] = 0;
            }
        }

        out["instances"][instance.id] = {{"type", type_name(instance.type)},
                                         {"evaluated", evaluated},
                                         {"full_pass", full_pass},
                                         {"best", best}};
        ++computed;
    }

    out["cache_hits"] = hits;
    out["computed"] = computed;
    write_file(cache_path, out.dump(2) + "\n");
    return out;
}

int cmd_brute_force(const RunConfig& config, int max_instances) {
    json out = brute_force_run(config, max_instances);
    std::cout << "brute-force: " << out["computed"] << " computed, " << out["cache_hits"]
              << " from cache, results in " << config.out_dir << "/brute_force.json\n";
    return 0;
}

int cmd_report(const RunConfig& config) {
    const std::string metrics_path = config.metrics_path();
    std::ifstream is(metrics_path);
    if (!is) raise(ErrorCode::IoError, "cannot read " + metrics_path + " (run train first)");

    std::vector<MetricsRow> rows;
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        MetricsRow row;
        long long step_ll = 0;
        if (std::sscanf(line.c_str(), "%lld,%d,%lf,%lf,%lf,%lf", &step_ll, &row.phase,
                        &row.reward, &row.compile_success, &row.norm_gas,
                        &row.entropy_coef) != 6)
            raise(ErrorCode::UnparsableOutput, "bad metrics row: " + line);
        row.step = step_ll;
        rows.push_back(row);
    }
    if (rows.empty()) raise(ErrorCode::UnparsableOutput, metrics_path + " has no rows");

    const int window_steps = 500;
    const int k = std::max(1, window_steps / std::max(config.train.log_every, 1));
    std::ostringstream csv;
    csv << "step,reward_smoothed,compile_success_smoothed,norm_gas_smoothed\n";
    Series reward_s{"reward (scaled to [0,1])", {}, {}};
    Series compile_s{"compile success", {}, {}};
    Series norm_s{"normalized gas score", {}, {}};
    double reward_lo = rows[0].reward, reward_hi = rows[0].reward;
    for (const MetricsRow& row : rows) {
        reward_lo = std::min(reward_lo, row.reward);
        reward_hi = std::max(reward_hi, row.reward);
    }
    const double reward_span = reward_hi > reward_lo ? reward_hi - reward_lo : 1.0;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        double reward = 0.0, compile = 0.0, norm = 0.0;
        const std::size_t start = i + 1 >= static_cast<std::size_t>(k) ? i + 1 - k : 0;
        const std::size_t n = i - start + 1;
        for (std::size_t j = start; j <= i; ++j) {
            reward += rows[j].reward;
            compile += rows[j].compile_success;
            norm += rows[j].norm_gas;
        }
        reward /= static_cast<double>(n);
        compile /= static_cast<double>(n);
        norm /= static_cast<double>(n);
        csv << rows[i].step << "," << csv_double(reward) << "," << csv_double(compile) << ","
            << csv_double(norm) << "\n";
        const double x = static_cast<double>(rows[i].step);
        reward_s.xs.push_back(x);
        reward_s.ys.push_back((reward - reward_lo) / reward_span);
        compile_s.xs.push_back(x);
        compile_s.ys.push_back(compile);
        norm_s.xs.push_back(x);
        norm_s.ys.push_back(norm);
    }

    write_file(config.out_dir + "/report.csv", csv.str());
    write_file(config.out_dir + "/report.svg",
               svg_line_chart({reward_s, compile_s, norm_s}, "Training curves",
                              "trailing mean, window=" + std::to_string(window_steps) +
                                  " steps"));
    std::cout << "report: wrote " << config.out_dir << "/report.csv and report.svg\n";
    return 0;
}

} // namespace gascraft
