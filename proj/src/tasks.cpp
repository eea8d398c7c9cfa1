#include "nnrnn/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nnrnn {

void CopyTaskSpec::validate() const {
  if (delay < 1) throw std::invalid_argument("CopyTaskSpec: delay must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("CopyTaskSpec: batch_size must be >= 1");
}

CopyTaskStream::CopyTaskStream(const CopyTaskSpec& spec) : spec_(spec), rng_(spec.seed) {
  spec_.validate();
}

SequenceBatch CopyTaskStream::next() {
  const std::size_t len = spec_.length();
  const std::size_t marker = spec_.delay + kCopyRecall - 1;
  SequenceBatch s;
  s.batch = spec_.batch_size;
  s.time = len;
  s.d_in = kCopyInputWidth;
  s.inputs.assign(s.batch * len * kCopyInputWidth, 0.0);
  s.targets.assign(s.batch * len, kCopyBlank);
  s.score_mask.assign(s.batch * len, 1);
  std::uniform_int_distribution<int> sym(0, kCopyDataSymbols - 1);
  for (std::size_t b = 0; b < s.batch; ++b) {
    auto put = [&](std::size_t t, int id) { s.inputs[(b * len + t) * kCopyInputWidth + id] = 1.0; };
    for (std::size_t t = 0; t < len; ++t) {
      if (t < kCopyRecall) {
        const int id = sym(rng_);
        put(t, id);
        s.targets[b * len + marker + 1 + t] = id;
      } else {
        put(t, t == marker ? kCopyMarker : kCopyBlank);
      }
    }
  }
  return s;
}

SequenceBatch copy_batch(const CopyTaskSpec& spec) { return CopyTaskStream(spec).next(); }

double copy_baseline_loss(std::size_t delay) {
  if (delay < 1) throw std::invalid_argument("copy_baseline_loss: delay must be >= 1");
  return 10.0 * std::log(8.0) / static_cast<double>(delay + 20);
}

void CharLmSpec::validate() const {
  if (window < 2) throw std::invalid_argument("CharLmSpec: window must be >= 2");
  if (batch_size < 1) throw std::invalid_argument("CharLmSpec: batch_size must be >= 1");
}

std::string read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open corpus: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CharLmStream::CharLmStream(std::string text, std::size_t window, std::size_t batch_size)
    : index_(256, -1), window_(window), batch_(batch_size) {
  CharLmSpec{{}, window, batch_size}.validate();
  if (text.empty()) throw std::invalid_argument("CharLmStream: empty corpus");
  std::vector<bool> seen(256, false);
  for (unsigned char c : text) seen[c] = true;
  for (int c = 0; c < 256; ++c)
    if (seen[c]) {
      index_[c] = static_cast<int>(vocab_.size());
      vocab_.push_back(static_cast<unsigned char>(c));
    }
  ids_.reserve(text.size());
  for (unsigned char c : text) ids_.push_back(index_[c]);
  // A lane of length L consumes L inputs and needs one extra target.
  lane_len_ = (ids_.size() - 1) / batch_ / window_ * window_;
  if (lane_len_ == 0)
    throw std::invalid_argument("CharLmStream: corpus shorter than one window per lane");
}

CharLmStream::CharLmStream(const CharLmSpec& spec)
    : CharLmStream(read_corpus(spec.corpus), spec.window, spec.batch_size) {}

std::vector<int> CharLmStream::window_inputs(std::size_t b, std::size_t w) const {
  const std::size_t start = b * lane_len_ + w * window_;
  return {ids_.begin() + static_cast<std::ptrdiff_t>(start),
          ids_.begin() + static_cast<std::ptrdiff_t>(start + window_)};
}

SequenceBatch CharLmStream::next() {
  const std::size_t v = vocab_.size();
  SequenceBatch s;
  s.batch = batch_;
  s.time = window_;
  s.d_in = v;
  s.inputs.assign(batch_ * window_ * v, 0.0);
  s.targets.resize(batch_ * window_);
  s.score_mask.assign(batch_ * window_, 1);
  s.continues_previous = cursor_ != 0;
  for (std::size_t b = 0; b < batch_; ++b) {
    const std::size_t start = b * lane_len_ + cursor_ * window_;
    for (std::size_t t = 0; t < window_; ++t) {
      s.inputs[(b * window_ + t) * v + static_cast<std::size_t>(ids_[start + t])] = 1.0;
      s.targets[b * window_ + t] = ids_[start + t + 1];
    }
  }
  if (++cursor_ == windows_per_epoch()) {
    cursor_ = 0;
    ++epoch_;
  }
  return s;
}

double nats_to_bpc(double nats) { return nats / std::numbers::ln2; }
double bpc_to_nats(double bpc) { return bpc * std::numbers::ln2; }

}  // namespace nnrnn
