// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "gascraft/rng.hpp"

namespace gascraft {

namespace {

using json = nlohmann::json;

double xavier_limit(long fan_in, long fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Eigen::MatrixXd xavier(long rows, long cols, std::mt19937_64& rng) {
    const double limit = xavier_limit(cols, rows);
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = (2.0 * rng_unit(rng) - 1.0) * limit;
    return m;
}

double entropy_of(const Eigen::VectorXd& p) {
    double h = 0.0;
    for (long i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) h -= p(i) * std::log(p(i));
    return h;
}

double log_sum_exp(const Eigen::VectorXd& z) {
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

struct LossParts {
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    int clipped = 0;
    int count = 0;
};

double loss_and_grads_impl(const PolicyNet& net, const std::vector<const Transition*>& batch,
                           const PpoConfig& config, double entropy_coef, Grads& out,
                           LossParts* parts) {
    out = Grads::zeros_like(net);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double policy_loss = 0.0, value_loss = 0.0, entropy_sum = 0.0;
    int clipped = 0;

    for (const Transition* t : batch) {
        if (t->obs.size() != net.obs_dim)
            raise(ErrorCode::DimensionMismatch,
                  "observation width " + std::to_string(t->obs.size()) + ", net expects " +
                      std::to_string(net.obs_dim));
        Forward fwd = forward(net, t->obs);

        const double lp_new = action_log_prob(fwd, t->action);
        const double ratio = std::exp(lp_new - t->log_prob);
        const double clamped =
            std::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio);
        const double s1 = ratio * t->advantage;
        const double s2 = clamped * t->advantage;
        const double objective = std::min(s1, s2);
        policy_loss -= objective;
        if (clamped != ratio) ++clipped;

        const double value_err = fwd.value - t->ret;
        value_loss += value_err * value_err;

        const double h = masked_entropy(fwd, t->mask);
        entropy_sum += h;

        // d(-objective)/d lp_new: the surrogate only moves while the
        // unclipped branch is active.
        const double dlp = (s1 <= s2) ? -s1 : 0.0;
        const double dvalue = config.value_coef * 2.0 * value_err;

        Eigen::VectorXd dh2 = net.value_w.transpose() * dvalue;
        for (int k = 0; k < net.head_count(); ++k) {
            const Eigen::VectorXd p = softmax(fwd.logits[static_cast<std::size_t>(k)]);
            Eigen::VectorXd gz = -dlp * p;
            gz(t->action[static_cast<std::size_t>(k)]) += dlp;
            if (!t->mask.empty() && t->mask[static_cast<std::size_t>(k)]) {
                const double hk = entropy_of(p);
                for (long i = 0; i < p.size(); ++i)
                    if (p(i) > 0.0)
                        gz(i) += entropy_coef * p(i) * (std::log(p(i)) + hk);
            }
            out.head_w[static_cast<std::size_t>(k)] += gz * fwd.h2.transpose();
            out.head_b[static_cast<std::size_t>(k)] += gz;
            dh2 += net.head_w[static_cast<std::size_t>(k)].transpose() * gz;
        }
        out.value_w += dvalue * fwd.h2.transpose();
        out.value_b += dvalue;

        const Eigen::VectorXd dz2 =
            dh2.array() * (1.0 - fwd.h2.array() * fwd.h2.array());
        out.w2 += dz2 * fwd.h1.transpose();
        out.b2 += dz2;
        const Eigen::VectorXd dh1 = net.w2.transpose() * dz2;
        const Eigen::VectorXd dz1 =
            dh1.array() * (1.0 - fwd.h1.array() * fwd.h1.array());
        out.w1 += dz1 * t->obs.transpose();
        out.b1 += dz1;
    }

    out.w1 *= inv_b;
    out.b1 *= inv_b;
    out.w2 *= inv_b;
    out.b2 *= inv_b;
    for (auto& m : out.head_w) m *= inv_b;
    for (auto& v : out.head_b) v *= inv_b;
    out.value_w *= inv_b;
    out.value_b *= inv_b;

    const double loss =
        (policy_loss + config.value_coef * value_loss - entropy_coef * entropy_sum) * inv_b;
    if (!std::isfinite(loss)) {
        double r_lo = std::numeric_limits<double>::infinity(), r_hi = -r_lo;
        double a_lo = r_lo, a_hi = -r_lo;
        for (const Transition* t : batch) {
            r_lo = std::min(r_lo, t->reward);
            r_hi = std::max(r_hi, t->reward);
            a_lo = std::min(a_lo, t->advantage);
            a_hi = std::max(a_hi, t->advantage);
        }
        std::ostringstream msg;
        msg << "loss=" << loss << " batch=" << batch.size() << " reward=[" << r_lo << ","
            << r_hi << "] advantage=[" << a_lo << "," << a_hi << "]";
        raise(ErrorCode::NonFiniteLoss, msg.str());
    }

    if (parts != nullptr) {
        parts->policy += policy_loss * inv_b;
        parts->value += value_loss * inv_b;
        parts->entropy += entropy_sum * inv_b;
        parts->clipped += clipped;
        parts->count += static_cast<int>(batch.size());
    }
    return loss;
}

void write_bytes(std::ostream& os, const void* data, std::size_t n) {
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u32(std::string& out, std::uint32_t v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_tensor(std::string& out, const std::string& name, const Eigen::MatrixXd& m) {
    const auto name_len = static_cast<std::uint16_t>(name.size());
    out.append(reinterpret_cast<const char*>(&name_len), sizeof name_len);
    out.append(name);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            out.append(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

struct TensorReader {
    const std::string& buf;
    std::size_t pos;

    template <typename T>
    T scalar() {
        if (pos + sizeof(T) > buf.size())
            raise(ErrorCode::CorruptCheckpoint, "truncated tensor block");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    std::string bytes(std::size_t n) {
        if (pos + n > buf.size())
            raise(ErrorCode::CorruptCheckpoint, "truncated tensor block");
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

// Flat name -> tensor walk used by both save and load so the two can never
// disagree about the layout.
template <typename Net, typename Ad, typename Fn>
void for_each_tensor(Net& net, Ad& adam, Fn&& fn) {
    auto grads = [&fn](const std::string& prefix, auto& g, const PolicyNet& shape) {
        fn(prefix + "w1", g.w1);
        fn(prefix + "b1", g.b1);
        fn(prefix + "w2", g.w2);
        fn(prefix + "b2", g.b2);
        for (int k = 0; k < shape.head_count(); ++k) {
            fn(prefix + "head_w." + std::to_string(k), g.head_w[static_cast<std::size_t>(k)]);
            fn(prefix + "head_b." + std::to_string(k), g.head_b[static_cast<std::size_t>(k)]);
        }
        fn(prefix + "value_w", g.value_w);
        fn(prefix + "value_b", g.value_b);
    };
    fn("w1", net.w1);
    fn("b1", net.b1);
    fn("w2", net.w2);
    fn("b2", net.b2);
    for (int k = 0; k < net.head_count(); ++k) {
        fn("head_w." + std::to_string(k), net.head_w[static_cast<std::size_t>(k)]);
        fn("head_b." + std::to_string(k), net.head_b[static_cast<std::size_t>(k)]);
    }
    fn("value_w", net.value_w);
    fn("value_b", net.value_b);
    grads("adam.m.", adam.m, net);
    grads("adam.v.", adam.v, net);
}

constexpr char kCheckpointMagic[8] = {'G', 'C', 'K', 'P', '0', '0', '0', '1'};

} // namespace

PolicyNet PolicyNet::init(int obs_dim, const std::vector<int>& head_sizes, std::uint64_t seed,
                          int hidden) {
    if (obs_dim <= 0 || hidden <= 0 || head_sizes.empty())
        raise(ErrorCode::ConfigError, "policy needs positive dimensions and at least one head");
    for (int s : head_sizes)
        if (s <= 0) raise(ErrorCode::ConfigError, "head size must be positive");

    std::mt19937_64 rng(seed);
    PolicyNet net;
    net.obs_dim = obs_dim;
    net.hidden = hidden;
    net.head_sizes = head_sizes;
    net.w1 = xavier(hidden, obs_dim, rng);
    net.b1 = Eigen::VectorXd::Zero(hidden);
    net.w2 = xavier(hidden, hidden, rng);
    net.b2 = Eigen::VectorXd::Zero(hidden);
    for (int s : head_sizes) {
        net.head_w.push_back(xavier(s, hidden, rng));
        net.head_b.push_back(Eigen::VectorXd::Zero(s));
    }
    net.value_w = xavier(1, hidden, rng);
    net.value_b = 0.0;
    return net;
}

Forward forward(const PolicyNet& net, const Eigen::VectorXd& obs) {
    if (obs.size() != net.obs_dim)
        raise(ErrorCode::DimensionMismatch,
              "observation width " + std::to_string(obs.size()) + ", net expects " +
                  std::to_string(net.obs_dim));
    Forward fwd;
    fwd.h1 = (net.w1 * obs + net.b1).array().tanh();
    fwd.h2 = (net.w2 * fwd.h1 + net.b2).array().tanh();
    fwd.logits.reserve(net.head_w.size());
    for (std::size_t k = 0; k < net.head_w.size(); ++k)
        fwd.logits.push_back(net.head_w[k] * fwd.h2 + net.head_b[k]);
    fwd.value = net.value_w.dot(fwd.h2) + net.value_b;
    return fwd;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

std::vector<int> sample_action(const Forward& fwd, std::mt19937_64& rng) {
    std::vector<int> action;
    action.reserve(fwd.logits.size());
    for (const Eigen::VectorXd& logits : fwd.logits) {
        const Eigen::VectorXd p = softmax(logits);
        const double u = rng_unit(rng);
        double cum = 0.0;
        int pick = static_cast<int>(p.size()) - 1;
        for (long i = 0; i < p.size(); ++i) {
            cum += p(i);
            if (u < cum) {
                pick = static_cast<int>(i);
                break;
            }
        }
        action.push_back(pick);
    }
    return action;
}

std::vector<int> greedy_action(const Forward& fwd) {
    std::vector<int> action;
    action.reserve(fwd.logits.size());
    for (const Eigen::VectorXd& logits : fwd.logits) {
        int best = 0;
        for (long i = 1; i < logits.size(); ++i)
            if (logits(i) > logits(best)) best = static_cast<int>(i);
        action.push_back(best);
    }
    return action;
}

double action_log_prob(const Forward& fwd, const std::vector<int>& action) {
    if (action.size() != fwd.logits.size())
        raise(ErrorCode::DimensionMismatch,
              "action has " + std::to_string(action.size()) + " entries for " +
                  std::to_string(fwd.logits.size()) + " heads");
    double lp = 0.0;
    for (std::size_t k = 0; k < fwd.logits.size(); ++k) {
        const Eigen::VectorXd& z = fwd.logits[k];
        const int a = action[k];
        if (a < 0 || a >= z.size())
            raise(ErrorCode::ActionOutOfRange,
                  "head " + std::to_string(k) + " index " + std::to_string(a));
        lp += z(a) - log_sum_exp(z);
    }
    return lp;
}

double masked_entropy(const Forward& fwd, const std::vector<std::uint8_t>& mask) {
    if (!mask.empty() && mask.size() != fwd.logits.size())
        raise(ErrorCode::DimensionMismatch,
              "mask has " + std::to_string(mask.size()) + " entries for " +
                  std::to_string(fwd.logits.size()) + " heads");
    double h = 0.0;
    for (std::size_t k = 0; k < fwd.logits.size(); ++k) {
        if (!mask.empty() && !mask[k]) continue;
        h += entropy_of(softmax(fwd.logits[k]));
    }
    return h;
}

void compute_gae(std::vector<Transition>& buffer, const std::vector<bool>& dones, double gamma,
                 double lambda) {
    if (buffer.size() != dones.size())
        raise(ErrorCode::DimensionMismatch,
              "buffer has " + std::to_string(buffer.size()) + " transitions, dones has " +
                  std::to_string(dones.size()));
    double next_adv = 0.0;
    for (std::size_t i = buffer.size(); i-- > 0;) {
        const double nonterminal = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < buffer.size()) ? buffer[i + 1].value : 0.0;
        const double delta =
            buffer[i].reward + gamma * next_value * nonterminal - buffer[i].value;
        next_adv = delta + gamma * lambda * nonterminal * next_adv;
        buffer[i].advantage = next_adv;
        buffer[i].ret = next_adv + buffer[i].value;
    }
}

double entropy_coef_at(const PpoConfig& config, std::int64_t env_step) {
    if (config.entropy_horizon <= 0) return config.entropy_coef_end;
    const double frac = std::clamp(
        static_cast<double>(env_step) / static_cast<double>(config.entropy_horizon), 0.0, 1.0);
    return config.entropy_coef_start +
           (config.entropy_coef_end - config.entropy_coef_start) * frac;
}

Grads Grads::zeros_like(const PolicyNet& net) {
    Grads g;
    g.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    g.b1 = Eigen::VectorXd::Zero(net.b1.size());
    g.w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
    g.b2 = Eigen::VectorXd::Zero(net.b2.size());
    for (const auto& m : net.head_w) g.head_w.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
    for (const auto& v : net.head_b) g.head_b.push_back(Eigen::VectorXd::Zero(v.size()));
    g.value_w = Eigen::RowVectorXd::Zero(net.value_w.size());
    g.value_b = 0.0;
    return g;
}

double compute_loss_and_grads(const PolicyNet& net, const std::vector<Transition>& batch,
                              const PpoConfig& config, double entropy_coef, Grads& out) {
    if (batch.empty()) raise(ErrorCode::ConfigError, "empty batch");
    std::vector<const Transition*> ptrs;
    ptrs.reserve(batch.size());
    for (const Transition& t : batch) ptrs.push_back(&t);
    return loss_and_grads_impl(net, ptrs, config, entropy_coef, out, nullptr);
}

Adam Adam::init(const PolicyNet& net) {
    Adam a;
    a.m = Grads::zeros_like(net);
    a.v = Grads::zeros_like(net);
    return a;
}

void Adam::step(PolicyNet& net, const Grads& g, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    auto update = [&](auto& param, auto& m_t, auto& v_t, const auto& grad) {
        m_t = beta1 * m_t + (1.0 - beta1) * grad;
        v_t = beta2 * v_t + (1.0 - beta2) * grad.cwiseProduct(grad);
        param -= (lr * (m_t / bc1).array() / ((v_t / bc2).array().sqrt() + eps)).matrix();
    };
    update(net.w1, m.w1, v.w1, g.w1);
    update(net.b1, m.b1, v.b1, g.b1);
    update(net.w2, m.w2, v.w2, g.w2);
    update(net.b2, m.b2, v.b2, g.b2);
    for (std::size_t k = 0; k < net.head_w.size(); ++k) {
        update(net.head_w[k], m.head_w[k], v.head_w[k], g.head_w[k]);
        update(net.head_b[k], m.head_b[k], v.head_b[k], g.head_b[k]);
    }
    update(net.value_w, m.value_w, v.value_w, g.value_w);
    {
        m.value_b = beta1 * m.value_b + (1.0 - beta1) * g.value_b;
        v.value_b = beta2 * v.value_b + (1.0 - beta2) * g.value_b * g.value_b;
        net.value_b -= lr * (m.value_b / bc1) / (std::sqrt(v.value_b / bc2) + eps);
    }
}

UpdateStats ppo_update(PolicyNet& net, Adam& adam, std::vector<Transition>& buffer,
                       const PpoConfig& config, std::int64_t env_step, std::mt19937_64& rng) {
    UpdateStats stats;
    stats.entropy_coef = entropy_coef_at(config, env_step);
    if (buffer.empty()) return stats;

    double mean = 0.0;
    for (const Transition& t : buffer) mean += t.advantage;
    mean /= static_cast<double>(buffer.size());
    double var = 0.0;
    for (const Transition& t : buffer) var += (t.advantage - mean) * (t.advantage - mean);
    var /= static_cast<double>(buffer.size());
    const double scale = 1.0 / (std::sqrt(var) + 1e-8);
    for (Transition& t : buffer) t.advantage = (t.advantage - mean) * scale;

    std::vector<std::size_t> order(buffer.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    LossParts parts;
    const int mb = std::max(config.minibatch_size, 1);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(mb)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(mb));
            std::vector<const Transition*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(&buffer[order[i]]);
            Grads grads;
            loss_and_grads_impl(net, batch, config, stats.entropy_coef, grads, &parts);
            adam.step(net, grads, config.learning_rate);
            ++stats.minibatches;
        }
    }
    if (stats.minibatches > 0) {
        stats.policy_loss = parts.policy / stats.minibatches;
        stats.value_loss = parts.value / stats.minibatches;
        stats.entropy = parts.entropy / stats.minibatches;
        stats.clip_fraction =
            parts.count > 0 ? static_cast<double>(parts.clipped) / parts.count : 0.0;
    }
    return stats;
}

void save_checkpoint(const std::string& path, const PolicyNet& net, const Adam& adam,
                     const nlohmann::json& metadata) {
    json meta = metadata;
    meta["model_version"] = kModelVersion;
    meta["net"] = {{"obs_dim", net.obs_dim},
                   {"hidden", net.hidden},
                   {"head_sizes", net.head_sizes}};
    meta["adam_t"] = adam.t;
    const std::string meta_text = meta.dump();

    std::string body;
    body.append(kCheckpointMagic, sizeof kCheckpointMagic);
    put_u32(body, static_cast<std::uint32_t>(meta_text.size()));
    body.append(meta_text);

    std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;
    for_each_tensor(net, adam, [&tensors](const std::string& name, const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, double>)
            tensors.emplace_back(name, Eigen::MatrixXd::Constant(1, 1, t));
        else
            tensors.emplace_back(name, Eigen::MatrixXd(t));
    });
    put_u32(body, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, tensor] : tensors) put_tensor(body, name, tensor);

    const std::uint64_t digest = fnv1a(body);
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) raise(ErrorCode::IoError, "cannot write " + tmp.string());
        write_bytes(os, body.data(), body.size());
        write_bytes(os, &digest, sizeof digest);
        if (!os) raise(ErrorCode::IoError, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) raise(ErrorCode::IoError, "cannot read " + path);
    std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    if (blob.size() < sizeof(kCheckpointMagic) + sizeof(std::uint64_t))
        raise(ErrorCode::CorruptCheckpoint, "file too small: " + path);
    const std::size_t body_len = blob.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    std::memcpy(&stored, blob.data() + body_len, sizeof stored);
    if (fnv1a(std::string_view(blob.data(), body_len)) != stored)
        raise(ErrorCode::CorruptCheckpoint, "content hash mismatch: " + path);
    if (std::memcmp(blob.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
        raise(ErrorCode::CorruptCheckpoint, "bad magic: " + path);

    TensorReader reader{blob, sizeof kCheckpointMagic};
    const auto meta_len = reader.scalar<std::uint32_t>();
    json meta;
    try {
        meta = json::parse(reader.bytes(meta_len));
    } catch (const json::exception& e) {
        raise(ErrorCode::CorruptCheckpoint, std::string("metadata: ") + e.what());
    }
    if (!meta.contains("net") || meta.value("model_version", "") != kModelVersion)
        raise(ErrorCode::CorruptCheckpoint, "unknown model version in " + path);

    CheckpointData data;
    data.metadata = meta;
    const auto head_sizes = meta["net"]["head_sizes"].get<std::vector<int>>();
    data.net = PolicyNet::init(meta["net"]["obs_dim"].get<int>(), head_sizes, 0,
                               meta["net"]["hidden"].get<int>());
    data.adam = Adam::init(data.net);
    data.adam.t = meta.value("adam_t", std::int64_t{0});

    std::map<std::string, Eigen::MatrixXd> loaded;
    const auto tensor_count = reader.scalar<std::uint32_t>();
    for (std::uint32_t i = 0; i < tensor_count; ++i) {
        const auto name_len = reader.scalar<std::uint16_t>();
        const std::string name = reader.bytes(name_len);
        const auto rows = reader.scalar<std::uint32_t>();
        const auto cols = reader.scalar<std::uint32_t>();
        Eigen::MatrixXd m(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r)
            for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = reader.scalar<double>();
        loaded.emplace(name, std::move(m));
    }
    if (reader.pos != body_len)
        raise(ErrorCode::CorruptCheckpoint, "trailing bytes in tensor block");

    for_each_tensor(data.net, data.adam, [&loaded, &path](const std::string& name, auto& t) {
        auto it = loaded.find(name);
        if (it == loaded.end())
            raise(ErrorCode::CorruptCheckpoint, "missing tensor " + name + " in " + path);
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, double>) {
            if (it->second.rows() != 1 || it->second.cols() != 1)
                raise(ErrorCode::CorruptCheckpoint, "tensor " + name + " is not scalar");
            t = it->second(0, 0);
        } else {
            if (it->second.rows() != t.rows() || it->second.cols() != t.cols())
                raise(ErrorCode::CorruptCheckpoint, "tensor " + name + " has wrong shape");
            t = it->second;
        }
        loaded.erase(it);
    });
    if (!loaded.empty())
        raise(ErrorCode::CorruptCheckpoint,
              "unexpected tensor " + loaded.begin()->first + " in " + path);
    return data;
}

void ensure_compatible(const PolicyNet& net, int obs_dim, const std::vector<int>& head_sizes) {
    if (net.obs_dim != obs_dim)
        raise(ErrorCode::DimensionMismatch,
              "checkpoint expects observation width " + std::to_string(net.obs_dim) +
                  ", environment provides " + std::to_string(obs_dim));
    if (net.head_sizes != head_sizes)
        raise(ErrorCode::DimensionMismatch, "checkpoint action shape differs from the library");
}

} // namespace gascraft
