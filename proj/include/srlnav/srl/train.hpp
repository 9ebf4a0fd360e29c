#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "srlnav/ad/optim.hpp"
#include "srlnav/ad/tape.hpp"
#include "srlnav/srl/dataset.hpp"
#include "srlnav/srl/encoder.hpp"
#include "srlnav/srl/priors.hpp"

namespace srlnav::srl {

enum class PriorObjective { continuous, original };

struct SrlTrainOptions {
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  PriorObjective objective = PriorObjective::continuous;
  double action_threshold = 0.1;  // only used by the original-priors objective
};

struct LossTraceRow {
  std::size_t epoch = 0;
  double temporal = 0, proportionality = 0, repeatability = 0, causality = 0, regularization = 0, total = 0;
};

struct SrlResult {
  Encoder encoder;
  std::vector<LossTraceRow> trace;  // row 0 is the untrained encoder
};

inline void write_loss_trace_csv(std::ostream& os, const std::vector<LossTraceRow>& trace) {
  os << "epoch,L_temp,L_prop,L_rep,L_caus,L_reg,L_total\n";
  os.precision(17);
  for (const auto& r : trace)
    os << r.epoch << ',' << r.temporal << ',' << r.proportionality << ',' << r.repeatability << ',' << r.causality
       << ',' << r.regularization << ',' << r.total << '\n';
}

namespace detail {

inline PriorLosses objective_losses(const PairBatch& b, const PriorHyper& hyper, const Encoder& enc,
                                    const SrlTrainOptions& opt) {
  return opt.objective == PriorObjective::continuous ? loss_total(b, hyper, enc)
                                                     : loss_original_priors(b, opt.action_threshold, hyper, enc);
}

inline void add_to(LossTraceRow& row, const PriorLosses& l) {
  row.temporal += l.temporal.item();
  row.proportionality += l.proportionality.item();
  row.repeatability += l.repeatability.item();
  row.causality += l.causality.item();
  row.regularization += l.regularization.item();
  row.total += l.total.item();
}

inline void average(LossTraceRow& row, std::size_t n) {
  const double k = 1.0 / static_cast<double>(n);
  row.temporal *= k;
  row.proportionality *= k;
  row.repeatability *= k;
  row.causality *= k;
  row.regularization *= k;
  row.total *= k;
}

inline std::vector<PairIndices> chunk_batches(const std::vector<std::size_t>& order, std::size_t batch_size) {
  std::vector<PairIndices> out;
  for (std::size_t start = 0; start + batch_size <= order.size(); start += batch_size) {
    PairIndices idx;
    idx.rows.assign(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(start + batch_size));
    pair_consecutive(idx);
    out.push_back(std::move(idx));
  }
  return out;
}

}  // namespace detail

/// Trains an encoder by minimizing the prior objective over shuffled minibatches
/// of non-terminal transitions.
inline SrlResult train_srl(std::span<const Sample> samples, const EncoderConfig& enc_cfg, const PriorHyper& hyper,
                           const SrlTrainOptions& opt) {
  hyper.validate();
  if (opt.batch_size < 2) throw std::invalid_argument("train_srl: batch_size must be at least 2");
  Rng init_rng(derive_seed(opt.seed, 0));
  Rng shuffle_rng(derive_seed(opt.seed, 1));
  SrlResult result{Encoder::create(enc_cfg, init_rng), {}};
  Encoder& enc = result.encoder;

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!samples[i].terminal) pool.push_back(i);
  if (pool.size() < opt.batch_size)
    throw std::invalid_argument("train_srl: need at least " + std::to_string(opt.batch_size) +
                                " non-terminal transitions, have " + std::to_string(pool.size()));

  LossTraceRow initial;
  auto eval_batches = detail::chunk_batches(pool, opt.batch_size);
  for (const auto& idx : eval_batches)
    detail::add_to(initial, detail::objective_losses(make_pair_batch(enc, samples, idx, true), hyper, enc, opt));
  detail::average(initial, eval_batches.size());
  result.trace.push_back(initial);

  auto params = enc.parameters();
  auto optimizer = ad::Optimizer::adam(opt.learning_rate);
  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    std::shuffle(pool.begin(), pool.end(), shuffle_rng);
    LossTraceRow row;
    row.epoch = epoch;
    auto batches = detail::chunk_batches(pool, opt.batch_size);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      auto losses = detail::objective_losses(make_pair_batch(enc, samples, batches[bi]), hyper, enc, opt);
      if (!std::isfinite(losses.total.item())) {
        std::ostringstream msg;
        msg << "train_srl: non-finite loss at epoch " << epoch << " batch " << bi << " (temp "
            << losses.temporal.item() << ", prop " << losses.proportionality.item() << ", rep "
            << losses.repeatability.item() << ", caus " << losses.causality.item() << ", reg "
            << losses.regularization.item() << ")";
        throw std::runtime_error(msg.str());
      }
      ad::backward(losses.total);
      optimizer.step(params);
      detail::add_to(row, losses);
    }
    detail::average(row, batches.size());
    spdlog::debug("srl epoch {}: total {:.6f}", epoch, row.total);
    result.trace.push_back(row);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Auto-encoder baseline

struct AutoEncoderOptions {
  std::size_t latent = 20;
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::vector<std::size_t> decoder_hidden{64, 128};
};

/// Encoder with the same two-branch layout plus a fully connected decoder back to
/// the concatenated observation (lidar then patch).
struct AutoEncoder {
  Encoder encoder;
  nn::Mlp decoder;

  static AutoEncoder create(EncoderConfig cfg, const AutoEncoderOptions& opt, Rng& rng) {
    cfg.state_dim = opt.latent;
    AutoEncoder ae;
    ae.encoder = Encoder::create(cfg, rng);
    std::vector<std::size_t> widths{opt.latent};
    widths.insert(widths.end(), opt.decoder_hidden.begin(), opt.decoder_hidden.end());
    widths.push_back(cfg.lidar_dim + cfg.patch_dim);
    ae.decoder = nn::Mlp(widths, nn::Activation::relu, nn::Activation::identity, rng);
    return ae;
  }

  Tensor reconstruct(const ObservationBatch& batch, bool frozen = false) const {
    return decoder.forward(encoder.forward(batch, frozen), frozen);
  }

  std::vector<Tensor> parameters() const {
    auto p = encoder.parameters();
    auto d = decoder.parameters();
    p.insert(p.end(), d.begin(), d.end());
    return p;
  }

  ad::NamedTensors named_parameters() const {
    auto out = encoder.named_parameters("encoder");
    decoder.append_named("decoder", out);
    return out;
  }
};

inline Tensor reconstruction_loss(const AutoEncoder& ae, const ObservationBatch& batch, bool frozen = false) {
  auto target = ad::concat_rows(batch.lidar, batch.patch);
  return ad::mean(ad::square(ae.reconstruct(batch, frozen) - target));
}

struct AeTraceRow {
  std::size_t epoch = 0;
  double reconstruction = 0.0;
};

struct AeResult {
  AutoEncoder model;
  std::vector<AeTraceRow> trace;  // row 0 is the untrained model
};

inline void write_ae_trace_csv(std::ostream& os, const std::vector<AeTraceRow>& trace) {
  os << "epoch,L_recon\n";
  os.precision(17);
  for (const auto& r : trace) os << r.epoch << ',' << r.reconstruction << '\n';
}

/// Mean squared reconstruction error over all observations, in fixed batches.
inline double reconstruction_mse(const AutoEncoder& ae, std::span<const Sample> samples, std::size_t batch_size = 512) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    auto part = samples.subspan(start, std::min(batch_size, samples.size() - start));
    auto batch = make_observation_batch(part, [](const Sample& s) -> const sim::Observation& { return s.obs; });
    total += reconstruction_loss(ae, batch, true).item() * static_cast<double>(part.size());
    count += part.size();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

inline AeResult autoencoder_train(std::span<const Sample> samples, const EncoderConfig& enc_cfg,
                                  const AutoEncoderOptions& opt) {
  if (samples.empty()) throw std::invalid_argument("autoencoder_train: empty dataset");
  Rng init_rng(derive_seed(opt.seed, 0));
  Rng shuffle_rng(derive_seed(opt.seed, 1));
  AeResult result{AutoEncoder::create(enc_cfg, opt, init_rng), {}};
  result.trace.push_back({0, reconstruction_mse(result.model, samples)});

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto params = result.model.parameters();
  auto optimizer = ad::Optimizer::adam(opt.learning_rate);
  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t n = std::min(opt.batch_size, order.size() - start);
      std::vector<const Sample*> rows;
      for (std::size_t i = 0; i < n; ++i) rows.push_back(&samples[order[start + i]]);
      auto batch = make_observation_batch(rows, [](const Sample* s) -> const sim::Observation& { return s->obs; });
      auto loss = reconstruction_loss(result.model, batch);
      if (!std::isfinite(loss.item()))
        throw std::runtime_error("autoencoder_train: non-finite loss at epoch " + std::to_string(epoch));
      ad::backward(loss);
      optimizer.step(params);
      sum += loss.item() * static_cast<double>(n);
      seen += n;
    }
    result.trace.push_back({epoch, sum / static_cast<double>(seen)});
    spdlog::debug("ae epoch {}: mse {:.6f}", epoch, result.trace.back().reconstruction);
  }
  return result;
}

}  // namespace srlnav::srl
