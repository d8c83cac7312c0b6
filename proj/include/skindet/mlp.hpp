#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "skindet/color.hpp"
#include "skindet/rng.hpp"

namespace skindet {

// One-hidden-layer topology C-HN-O. O is always 1 here: the single output
// neuron is decoded as 1 for skin and 0 for non-skin.
struct Topology {
  int inputs = 1;
  int hidden = 1;
  int outputs = 1;

  void validate() const {
    if (inputs < 1) throw std::invalid_argument("topology: inputs must be >= 1");
    if (hidden < 1 || hidden > 128)
      throw std::invalid_argument("topology: hidden must be in [1,128]");
    if (outputs != 1) throw std::invalid_argument("topology: outputs must be 1");
  }

  // C*HN hidden weights + HN hidden biases + HN output weights + 1 output bias.
  int parameter_count() const { return inputs * hidden + hidden + hidden + 1; }
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string data_file;   // id of the training file(s) used
  int epochs = 0;          // accepted epochs executed
  double train_mse = 0.0;  // of the returned parameters
  double val_mse = 0.0;
  bool trained = false;
};

// A sigmoid MLP. `feature_kinds` names the chrominance inputs; it is empty
// for networks whose inputs are already unit-interval values (the stacking
// network consumes raw member outputs).
struct Network {
  Topology topo;
  Eigen::MatrixXd hidden_weights;  // hidden x inputs
  Eigen::VectorXd hidden_bias;     // hidden
  Eigen::VectorXd output_weights;  // hidden
  double output_bias = 0.0;
  std::vector<FeatureKind> feature_kinds;
  Provenance prov;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // N x C, values in [0,1]
  Eigen::VectorXd targets;  // N, values in {0,1}

  Eigen::Index size() const { return inputs.rows(); }
};

struct TrainConfig {
  int max_epochs = 500;
  double goal_mse = 1e-6;
  double lambda0 = 1e-3;      // initial LM damping
  double lambda_up = 10.0;    // multiplier on rejected step
  double lambda_down = 10.0;  // divisor on accepted step
  double lambda_max = 1e10;   // stop once damping exceeds this

  void validate() const {
    if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
    if (!(goal_mse > 0)) throw std::invalid_argument("train config: goal_mse must be > 0");
    if (!(lambda_up > 1) || !(lambda_down > 1))
      throw std::invalid_argument("train config: lambda factors must be > 1");
    if (!(lambda0 > 0) || !(lambda_max > lambda0))
      throw std::invalid_argument("train config: bad lambda range");
  }
};

enum class StopReason { Goal, MaxEpochs, LambdaCeiling, SingularUpdate };

inline const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::Goal: return "goal";
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::LambdaCeiling: return "lambda_ceiling";
    case StopReason::SingularUpdate: return "singular";
  }
  return "?";
}

struct EpochStats {
  int epoch;  // 0 is the initial state
  double train_mse;
  double val_mse;
};

struct TrainResult {
  Network net;  // parameters with the lowest validation MSE seen
  std::vector<EpochStats> history;
  StopReason reason = StopReason::MaxEpochs;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Weights drawn i.i.d. uniform on [-0.5, 0.5] from a generator keyed by
// `seed`; identical (topology, kinds, seed) yield bit-identical networks.
// Fill order: hidden weights row-major (per hidden unit), hidden biases,
// output weights, output bias.
inline Network init_network(const Topology& t, const std::vector<FeatureKind>& kinds,
                            std::uint64_t seed) {
  t.validate();
  if (!kinds.empty() && static_cast<int>(kinds.size()) != t.inputs)
    throw std::invalid_argument("init_network: feature kinds do not match input count");
  Network n;
  n.topo = t;
  n.feature_kinds = kinds;
  n.prov.seed = seed;
  Rng rng(seed);
  n.hidden_weights.resize(t.hidden, t.inputs);
  for (int k = 0; k < t.hidden; ++k)
    for (int c = 0; c < t.inputs; ++c) n.hidden_weights(k, c) = rng.uniform(-0.5, 0.5);
  n.hidden_bias.resize(t.hidden);
  for (int k = 0; k < t.hidden; ++k) n.hidden_bias(k) = rng.uniform(-0.5, 0.5);
  n.output_weights.resize(t.hidden);
  for (int k = 0; k < t.hidden; ++k) n.output_weights(k) = rng.uniform(-0.5, 0.5);
  n.output_bias = rng.uniform(-0.5, 0.5);
  return n;
}

// Parameter vector layout shared by the Jacobian, the LM update and the
// model file: hidden weights row-major, hidden biases, output weights,
// output bias.
inline Eigen::VectorXd pack_params(const Network& n) {
  const int C = n.topo.inputs, H = n.topo.hidden;
  Eigen::VectorXd p(n.topo.parameter_count());
  int idx = 0;
  for (int k = 0; k < H; ++k)
    for (int c = 0; c < C; ++c) p(idx++) = n.hidden_weights(k, c);
  for (int k = 0; k < H; ++k) p(idx++) = n.hidden_bias(k);
  for (int k = 0; k < H; ++k) p(idx++) = n.output_weights(k);
  p(idx++) = n.output_bias;
  return p;
}

inline void unpack_params(const Eigen::VectorXd& p, Network& n) {
  const int C = n.topo.inputs, H = n.topo.hidden;
  if (p.size() != n.topo.parameter_count())
    throw std::invalid_argument("unpack_params: size mismatch");
  int idx = 0;
  for (int k = 0; k < H; ++k)
    for (int c = 0; c < C; ++c) n.hidden_weights(k, c) = p(idx++);
  for (int k = 0; k < H; ++k) n.hidden_bias(k) = p(idx++);
  for (int k = 0; k < H; ++k) n.output_weights(k) = p(idx++);
  n.output_bias = p(idx++);
}

inline double forward(const Network& n, const Eigen::VectorXd& x) {
  if (x.size() != n.topo.inputs)
    throw std::invalid_argument("forward: input dimension mismatch");
  Eigen::VectorXd h = (n.hidden_weights * x + n.hidden_bias)
                          .unaryExpr([](double v) { return sigmoid(v); });
  return sigmoid(n.output_weights.dot(h) + n.output_bias);
}

inline double forward(const Network& n, const std::vector<double>& x) {
  return forward(n, Eigen::Map<const Eigen::VectorXd>(x.data(),
                                                      static_cast<Eigen::Index>(x.size())));
}

// Batch outputs for a whole dataset; row-at-a-time, fixed order.
inline Eigen::VectorXd forward_all(const Network& n, const Dataset& d) {
  if (d.inputs.cols() != n.topo.inputs)
    throw std::invalid_argument("forward_all: input dimension mismatch");
  const Eigen::Index N = d.size();
  Eigen::MatrixXd z = d.inputs * n.hidden_weights.transpose();
  z.rowwise() += n.hidden_bias.transpose();
  Eigen::MatrixXd h = z.unaryExpr([](double v) { return sigmoid(v); });
  Eigen::VectorXd a = h * n.output_weights;
  Eigen::VectorXd y(N);
  for (Eigen::Index i = 0; i < N; ++i) y(i) = sigmoid(a(i) + n.output_bias);
  return y;
}

inline double mse(const Network& n, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("mse: empty dataset");
  const Eigen::VectorXd e = forward_all(n, d) - d.targets;
  return e.squaredNorm() / static_cast<double>(d.size());
}

// Residual Jacobian, entry (i,j) = d e_i / d theta_j with e_i = y_i - t_i,
// by backpropagation through both sigmoid layers. Row layout follows
// pack_params.
inline Eigen::MatrixXd jacobian(const Network& n, const Dataset& d) {
  if (d.size() == 0) throw std::invalid_argument("jacobian: empty dataset");
  if (d.inputs.cols() != n.topo.inputs)
    throw std::invalid_argument("jacobian: input dimension mismatch");
  const int C = n.topo.inputs, H = n.topo.hidden;
  const Eigen::Index N = d.size();
  Eigen::MatrixXd J(N, n.topo.parameter_count());

  Eigen::MatrixXd z = d.inputs * n.hidden_weights.transpose();
  z.rowwise() += n.hidden_bias.transpose();
  const Eigen::MatrixXd h = z.unaryExpr([](double v) { return sigmoid(v); });

  for (Eigen::Index i = 0; i < N; ++i) {
    const double yi = sigmoid(h.row(i).dot(n.output_weights) + n.output_bias);
    const double s = yi * (1.0 - yi);  // sigma'(a)
    int idx = 0;
    for (int k = 0; k < H; ++k) {
      const double hk = h(i, k);
      const double gk = s * n.output_weights(k) * hk * (1.0 - hk);
      for (int c = 0; c < C; ++c) J(i, idx++) = gk * d.inputs(i, c);
    }
    for (int k = 0; k < H; ++k) {
      const double hk = h(i, k);
      J(i, idx++) = s * n.output_weights(k) * hk * (1.0 - hk);
    }
    for (int k = 0; k < H; ++k) J(i, idx++) = s * h(i, k);
    J(i, idx++) = s;
  }
  return J;
}

// Levenberg-Marquardt: theta <- theta - (J'J + lambda I)^-1 J'e. An accepted
// step (train MSE decreased) divides lambda; a rejected one multiplies it
// and retries with the same Jacobian. Stops on goal, max_epochs, or lambda
// passing its ceiling. Returns the parameters with the lowest validation
// MSE seen, including the initial state.
inline TrainResult train_lm(Network net, const Dataset& train, const Dataset& val,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (train.size() == 0 || val.size() == 0)
    throw std::invalid_argument("train_lm: empty dataset");
  if (train.inputs.cols() != net.topo.inputs || val.inputs.cols() != net.topo.inputs)
    throw std::invalid_argument("train_lm: input dimension mismatch");

  TrainResult res;
  double cur_train = mse(net, train);
  double cur_val = mse(net, val);
  res.history.push_back({0, cur_train, cur_val});

  Eigen::VectorXd theta = pack_params(net);
  Eigen::VectorXd best_theta = theta;
  double best_val = cur_val;
  double best_val_train = cur_train;
  int epochs_run = 0;

  const auto finish = [&](StopReason reason) {
    res.reason = reason;
    unpack_params(best_theta, net);
    net.prov.epochs = epochs_run;
    net.prov.train_mse = best_val_train;
    net.prov.val_mse = best_val;
    net.prov.trained = true;
    res.net = std::move(net);
    return std::move(res);
  };

  if (cur_train <= cfg.goal_mse) return finish(StopReason::Goal);

  double lambda = cfg.lambda0;
  Network cand = net;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const Eigen::MatrixXd J = jacobian(net, train);
    const Eigen::VectorXd e = forward_all(net, train) - train.targets;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * e;

    bool accepted = false;
    bool singular = false;
    while (!accepted) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += lambda;
      const Eigen::VectorXd step = A.ldlt().solve(g);
      singular = !step.allFinite();
      double new_train = std::numeric_limits<double>::infinity();
      if (!singular) {
        unpack_params(theta - step, cand);
        new_train = mse(cand, train);
        if (!std::isfinite(new_train)) singular = true;
      }
      if (!singular && new_train < cur_train) {
        theta -= step;
        net = cand;
        cur_train = new_train;
        // Floor keeps lambda from underflowing to zero, which the
        // rejection multiplier could never recover from.
        lambda = std::max(lambda / cfg.lambda_down, 1e-300);
        accepted = true;
      } else {
        lambda *= cfg.lambda_up;
        if (lambda > cfg.lambda_max)
          return finish(singular ? StopReason::SingularUpdate : StopReason::LambdaCeiling);
      }
    }

    epochs_run = epoch;
    cur_val = mse(net, val);
    res.history.push_back({epoch, cur_train, cur_val});
    if (cur_val < best_val) {
      best_val = cur_val;
      best_val_train = cur_train;
      best_theta = theta;
    }
    if (cur_train <= cfg.goal_mse) return finish(StopReason::Goal);
  }
  return finish(StopReason::MaxEpochs);
}

}  // namespace skindet
