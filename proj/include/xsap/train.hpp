#pragma once

#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/encoder.hpp"
#include "xsap/matrix.hpp"
#include "xsap/mining.hpp"
#include "xsap/ms_loss.hpp"
#include "xsap/rng.hpp"

namespace xsap {

// Records bucketed by label, groups in first-appearance order.
struct GroupedDataset {
  struct Group {
    LabelId label;
    std::vector<std::uint32_t> members;  // indices into records
  };
  std::vector<NameRecord> records;
  std::vector<Group> groups;
};

inline GroupedDataset group_by_label(std::vector<NameRecord> records) {
  GroupedDataset ds;
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < records.size(); ++i) {
    auto it = index.find(records[i].label.value);
    if (it == index.end()) {
      it = index.emplace(records[i].label.value,
                         static_cast<std::uint32_t>(ds.groups.size()))
               .first;
      ds.groups.push_back({records[i].label, {}});
    }
    ds.groups[it->second].members.push_back(i);
  }
  ds.records = std::move(records);
  return ds;
}

struct MiniBatch {
  std::vector<NameRecord> records;

  std::vector<LabelId> labels() const {
    std::vector<LabelId> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.label);
    return out;
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.name);
    return out;
  }
};

// Class-balanced batch: batch_size / names_per_class distinct labels drawn
// uniformly, then names_per_class distinct names from each (with
// replacement only when a class is smaller than names_per_class). Fully
// determined by the rng state.
inline MiniBatch sample_batch(const GroupedDataset& ds, Rng& rng,
                              std::uint32_t batch_size,
                              std::uint32_t names_per_class) {
  if (names_per_class == 0 || batch_size % names_per_class != 0)
    throw std::runtime_error("sample_batch: batch_size must be a multiple of names_per_class");
  const std::uint32_t n_labels = batch_size / names_per_class;
  if (ds.groups.size() < n_labels)
    throw std::runtime_error(
        "sample_batch: dataset too small (" + std::to_string(ds.groups.size()) +
        " labels, need " + std::to_string(n_labels) + ")");

  MiniBatch batch;
  batch.records.reserve(batch_size);
  const auto chosen =
      rng.sample_indices(static_cast<std::uint32_t>(ds.groups.size()), n_labels);
  for (const auto gi : chosen) {
    const auto& members = ds.groups[gi].members;
    if (members.size() >= names_per_class) {
      const auto picks = rng.sample_indices(
          static_cast<std::uint32_t>(members.size()), names_per_class);
      for (const auto mi : picks)
        batch.records.push_back(ds.records[members[mi]]);
    } else {
      for (std::uint32_t k = 0; k < names_per_class; ++k)
        batch.records.push_back(ds.records[members[rng.bounded(members.size())]]);
    }
  }
  return batch;
}

struct StepStat {
  std::uint64_t step = 0;  // 1-based
  double loss = 0.0;
  std::uint64_t n_triplets = 0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<StepStat> trace;
};

// One SAP pass: sample a class-balanced batch, encode, build the cosine
// matrix, mine hard triplets under the margin, collect pair sets, take the
// MS loss gradient, chain it through the encoder, apply plain SGD. Steps
// that mine zero triplets are skipped (loss recorded as 0). Deterministic
// for a fixed seed. Step count: epochs * ceil(|classes| * npc / batch).
inline TrainResult train(const std::vector<NameRecord>& dataset,
                         const TrainConfig& config, EncoderParams params) {
  config.validate();
  TrainResult result;
  GroupedDataset ds = group_by_label(dataset);
  const std::uint64_t n_classes = ds.groups.size();
  const std::uint64_t per_epoch =
      (n_classes * config.names_per_class + config.batch_size - 1) /
      config.batch_size;
  const std::uint64_t total_steps = static_cast<std::uint64_t>(config.epochs) * per_epoch;

  Rng rng(config.seed);
  const std::size_t n = config.batch_size;
  const std::size_t d = config.embed_dim;
  for (std::uint64_t step = 1; step <= total_steps; ++step) {
    const MiniBatch batch =
        sample_batch(ds, rng, config.batch_size, config.names_per_class);
    const auto labels = batch.labels();
    const Matrix embeddings = encode_batch(params, batch.names());
    const Matrix sims = similarity_matrix(embeddings);
    const auto triplets = mine_triplets(sims, labels, config.margin_lambda);
    if (triplets.empty()) {
      result.trace.push_back({step, 0.0, 0});
      continue;
    }
    const PairSets pairs = collect_pairs(triplets, n);
    double loss;
    Matrix g;
    try {
      loss = ms_loss(sims, pairs, config.alpha, config.beta, config.epsilon);
      g = ms_loss_grad(sims, pairs, config.alpha, config.beta, config.epsilon);
    } catch (const std::exception& e) {
      throw std::runtime_error("train: step " + std::to_string(step) + ": " +
                               e.what());
    }

    // dL/dE_i = sum_j (g_ij + g_ji) E_j
    Matrix d_embed(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double c = g.at(i, j) + g.at(j, i);
        if (c != 0.0) axpy(c, embeddings.row(j), d_embed.row(i));
      }

    ParamGrad grad;
    for (std::size_t i = 0; i < n; ++i)
      encode_backward_accum(params, batch.records[i].name, d_embed.row(i), grad);
    apply_gradient(params, grad, config.learning_rate);

    result.trace.push_back({step, loss, triplets.size()});
  }
  result.params = std::move(params);
  return result;
}

inline TrainResult train(const std::vector<NameRecord>& dataset,
                         const TrainConfig& config) {
  return train(dataset, config, init_params(config));
}

// Two-stage schedule: in-domain synonyms first, then general translation
// records continuing from the stage-1 parameters. Each stage reseeds from
// config.seed, so an empty stage leaves the other bit-identical to a plain
// train() call.
inline TrainResult train_sequential(const std::vector<NameRecord>& stage1,
                                    const std::vector<NameRecord>& stage2,
                                    const TrainConfig& config,
                                    EncoderParams params) {
  TrainResult first = train(stage1, config, std::move(params));
  TrainResult second = train(stage2, config, std::move(first.params));
  // one continuous trace, stage-2 steps renumbered after stage 1
  const std::uint64_t offset = first.trace.empty() ? 0 : first.trace.back().step;
  for (auto& stat : second.trace) {
    stat.step += offset;
    first.trace.push_back(stat);
  }
  return {std::move(second.params), std::move(first.trace)};
}

inline TrainResult train_sequential(const std::vector<NameRecord>& stage1,
                                    const std::vector<NameRecord>& stage2,
                                    const TrainConfig& config) {
  return train_sequential(stage1, stage2, config, init_params(config));
}

// `step,loss,n_triplets` rows; loss printed round-trip exact.
inline void write_trace_csv(std::ostream& out, const std::vector<StepStat>& trace) {
  out << "step,loss,n_triplets\n";
  char buf[64];
  for (const auto& s : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.loss);
    out << s.step << ',' << buf << ',' << s.n_triplets << '\n';
  }
}

inline std::string format_trace_csv(const std::vector<StepStat>& trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

}  // namespace xsap
