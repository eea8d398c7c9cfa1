#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nnrnn/rnn.hpp"

namespace nnrnn {

/// Source of training batches. Batches flagged `continues_previous` pick up
/// where the previous batch of the same lane stopped.
class TaskStream {
 public:
  virtual ~TaskStream() = default;
  virtual SequenceBatch next() = 0;
  virtual std::size_t d_in() const = 0;
  virtual std::size_t n_classes() const = 0;
};

// Copy task alphabet: ids 0..7 are data, 8 is blank, 9 is the marker.
inline constexpr int kCopyDataSymbols = 8;
inline constexpr int kCopyBlank = 8;
inline constexpr int kCopyMarker = 9;
inline constexpr std::size_t kCopyInputWidth = 10;
inline constexpr std::size_t kCopyClasses = 9;
inline constexpr std::size_t kCopyRecall = 10;

struct CopyTaskSpec {
  std::size_t delay = 50;
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;

  std::size_t length() const { return delay + 2 * kCopyRecall; }
  void validate() const;
};

/// Layout over delay + 20 steps: 10 data symbols, delay - 1 blanks, the
/// marker at step delay + 9, then 10 blanks. Targets are blank until step
/// delay + 10 and then the 10 data symbols. Every step is scored.
class CopyTaskStream : public TaskStream {
 public:
  explicit CopyTaskStream(const CopyTaskSpec& spec);
  SequenceBatch next() override;
  std::size_t d_in() const override { return kCopyInputWidth; }
  std::size_t n_classes() const override { return kCopyClasses; }

 private:
  CopyTaskSpec spec_;
  std::mt19937_64 rng_;
};

/// First batch of a stream seeded with spec.seed.
SequenceBatch copy_batch(const CopyTaskSpec& spec);

/// 10 ln 8 / (delay + 20): loss of predicting blank until the marker and a
/// uniform guess over the data symbols afterwards.
double copy_baseline_loss(std::size_t delay);

struct CharLmSpec {
  std::filesystem::path corpus;
  std::size_t window = 150;
  std::size_t batch_size = 32;

  void validate() const;
};

/// Byte-level next-character prediction. The corpus is split into
/// batch_size contiguous lanes; each batch holds the next window of every
/// lane. When an epoch wraps the first batch has continues_previous unset.
class CharLmStream : public TaskStream {
 public:
  CharLmStream(std::string text, std::size_t window, std::size_t batch_size);
  explicit CharLmStream(const CharLmSpec& spec);

  SequenceBatch next() override;
  std::size_t d_in() const override { return vocab_.size(); }
  std::size_t n_classes() const override { return vocab_.size(); }

  const std::vector<unsigned char>& vocabulary() const { return vocab_; }
  int token(unsigned char c) const { return index_[c]; }
  std::size_t lane_length() const { return lane_len_; }
  std::size_t windows_per_epoch() const { return lane_len_ / window_; }
  std::size_t epoch() const { return epoch_; }
  /// Token ids consumed as inputs by lane `b`, window `w`.
  std::vector<int> window_inputs(std::size_t b, std::size_t w) const;

 private:
  std::vector<int> ids_;
  std::vector<unsigned char> vocab_;
  std::vector<int> index_;
  std::size_t window_;
  std::size_t batch_;
  std::size_t lane_len_ = 0;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

std::string read_corpus(const std::filesystem::path& path);

double nats_to_bpc(double nats);
double bpc_to_nats(double bpc);

}  // namespace nnrnn
