// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gascraft/types.hpp"

namespace gascraft {

inline constexpr const char* kModelVersion = "ppo-mlp-v1";

// Two tanh hidden layers feeding one categorical head per library symbol
// plus a scalar value head. All math is double precision.
struct PolicyNet {
    int obs_dim = 0;
    int hidden = 64;
    std::vector<int> head_sizes;

    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
    std::vector<Eigen::MatrixXd> head_w;
    std::vector<Eigen::VectorXd> head_b;
    Eigen::RowVectorXd value_w;
    double value_b = 0.0;

    static PolicyNet init(int obs_dim, const std::vector<int>& head_sizes,
                          std::uint64_t seed, int hidden = 64);
    int head_count() const { return static_cast<int>(head_sizes.size()); }
};

struct Forward {
    Eigen::VectorXd h1, h2;
    std::vector<Eigen::VectorXd> logits;
    double value = 0.0;
};

Forward forward(const PolicyNet& net, const Eigen::VectorXd& obs);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Inverse-CDF draw per head using one uniform from rng each.
std::vector<int> sample_action(const Forward& fwd, std::mt19937_64& rng);
// Argmax per head; ties resolve to the lowest index.
std::vector<int> greedy_action(const Forward& fwd);

// Joint log probability across every head (non-blueprint heads included;
// they cancel in the PPO ratio because old and new share the width).
double action_log_prob(const Forward& fwd, const std::vector<int>& action);

// Entropy summed over the heads whose mask entry is nonzero.
double masked_entropy(const Forward& fwd, const std::vector<std::uint8_t>& mask);

struct Transition {
    Eigen::VectorXd obs;
    std::vector<int> action;
    std::vector<std::uint8_t> mask; // per-symbol entropy mask
    double reward = 0.0;
    double value = 0.0;    // V(s) at collection time
    double log_prob = 0.0; // joint log-prob at collection time
    double advantage = 0.0;
    double ret = 0.0;
};

// Generalized advantage estimation over a flat buffer; episodes end where
// dones[t] is true. With single-step episodes this reduces to r - V.
void compute_gae(std::vector<Transition>& buffer, const std::vector<bool>& dones,
                 double gamma, double lambda);

struct PpoConfig {
    double learning_rate = 3e-4;
    double clip_ratio = 0.2;
    double value_coef = 0.5;
    double entropy_coef_start = 0.05;
    double entropy_coef_end = 0.005;
    std::int64_t entropy_horizon = 30000; // env steps until the floor
    int epochs = 4;
    int minibatch_size = 64;
    double gamma = 0.99;
    double gae_lambda = 0.95;
};

// Linear decay from start to end, flat at the floor from the horizon on.
double entropy_coef_at(const PpoConfig& config, std::int64_t env_step);

struct Grads {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
    std::vector<Eigen::MatrixXd> head_w;
    std::vector<Eigen::VectorXd> head_b;
    Eigen::RowVectorXd value_w;
    double value_b = 0.0;

    static Grads zeros_like(const PolicyNet& net);
};

// Mean clipped-surrogate + value + entropy loss over the batch, with
// analytic gradients accumulated into out. Advantages are used as stored.
// Raises NonFiniteLoss (with a batch digest) on non-finite loss.
double compute_loss_and_grads(const PolicyNet& net, const std::vector<Transition>& batch,
                              const PpoConfig& config, double entropy_coef, Grads& out);

struct Adam {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    Grads m, v;

    static Adam init(const PolicyNet& net);
    void step(PolicyNet& net, const Grads& g, double lr);
};

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double entropy_coef = 0.0;
    double clip_fraction = 0.0;
    int minibatches = 0;
};

// One PPO update over the buffer: per-batch advantage normalization, then
// config.epochs passes of shuffled minibatches.
UpdateStats ppo_update(PolicyNet& net, Adam& adam, std::vector<Transition>& buffer,
                       const PpoConfig& config, std::int64_t env_step, std::mt19937_64& rng);

// Checkpoints: little-endian float64 tensors, a JSON metadata block, and a
// trailing content hash. Writes are atomic (temp file + rename).
void save_checkpoint(const std::string& path, const PolicyNet& net, const Adam& adam,
                     const nlohmann::json& metadata);

struct CheckpointData {
    PolicyNet net;
    Adam adam;
    nlohmann::json metadata;
};

CheckpointData load_checkpoint(const std::string& path);

// Raises DimensionMismatch when the checkpointed net does not fit the
// observation width and action shape of the current library.
void ensure_compatible(const PolicyNet& net, int obs_dim, const std::vector<int>& head_sizes);

} // namespace gascraft
