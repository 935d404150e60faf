#include "lacksim/voip_channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace lacksim {

namespace {

std::uint8_t tail_mask(std::size_t nbits) {
  const std::size_t used = nbits % 8;
  return used == 0 ? 0xFF : static_cast<std::uint8_t>(0xFF << (8 - used));
}

}  // namespace

// ---------------------------------------------------------------------------
// BitString

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes) {
  return from_bytes(bytes, bytes.size() * 8);
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (nbits > bytes.size() * 8) {
    throw FramingError(fmt::format("{} bits requested from {} bytes", nbits, bytes.size()));
  }
  BitString out(nbits);
  std::copy_n(bytes.begin(), out.bytes_.size(), out.bytes_.begin());
  if (!out.bytes_.empty()) out.bytes_.back() &= tail_mask(nbits);
  return out;
}

BitString BitString::random(std::size_t nbits, Rng& rng) {
  BitString out(nbits);
  for (std::size_t i = 0; i < out.bytes_.size(); i += 8) {
    std::uint64_t word = rng();
    for (std::size_t j = i; j < std::min(i + 8, out.bytes_.size()); ++j) {
      out.bytes_[j] = static_cast<std::uint8_t>(word >> 56);
      word <<= 8;
    }
  }
  if (!out.bytes_.empty()) out.bytes_.back() &= tail_mask(nbits);
  return out;
}

bool BitString::get(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("bit index out of range");
  return (bytes_[i / 8] >> (7 - i % 8)) & 1U;
}

void BitString::set(std::size_t i, bool value) {
  if (i >= size_) throw std::out_of_range("bit index out of range");
  const auto mask = static_cast<std::uint8_t>(1U << (7 - i % 8));
  if (value) {
    bytes_[i / 8] |= mask;
  } else {
    bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
  }
}

void BitString::append(const BitString& other) {
  if (size_ % 8 == 0) {
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
    size_ += other.size_;
    return;
  }
  const std::size_t start = size_;
  size_ += other.size_;
  bytes_.resize((size_ + 7) / 8, 0);
  for (std::size_t i = 0; i < other.size_; ++i) {
    if (other.get(i)) set(start + i, true);
  }
}

BitString BitString::slice(std::size_t offset, std::size_t count) const {
  if (offset > size_ || count > size_ - offset) {
    throw std::out_of_range(
        fmt::format("slice [{}, {}) exceeds {} bits", offset, offset + count, size_));
  }
  BitString out(count);
  if (offset % 8 == 0) {
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(offset / 8), out.bytes_.size(),
                out.bytes_.begin());
    if (!out.bytes_.empty()) out.bytes_.back() &= tail_mask(count);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (get(offset + i)) out.set(i, true);
  }
  return out;
}

BitString BitString::resized(std::size_t nbits) const {
  if (nbits <= size_) return slice(0, nbits);
  BitString out = *this;
  out.size_ = nbits;
  out.bytes_.resize((nbits + 7) / 8, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Stream and LACK mechanics

std::vector<std::string> JitterBufferConfig::violations(const NetworkModel& network) const {
  std::vector<std::string> out;
  if (!(network.base_delay >= 0.0)) out.push_back("base_delay must be >= 0");
  if (!(network.jitter >= 0.0)) out.push_back("jitter must be >= 0");
  if (!(network.random_loss >= 0.0 && network.random_loss < 1.0)) {
    out.push_back("random_loss must be in [0, 1)");
  }
  if (!(playout_deadline > 0.0)) out.push_back("playout_deadline must be > 0");
  if (!(network.base_delay <= playout_deadline)) {
    out.push_back(fmt::format("base_delay ({:g}) must not exceed playout_deadline ({:g})",
                              network.base_delay, playout_deadline));
  }
  if (!(lack_delay > playout_deadline - network.base_delay)) {
    out.push_back(fmt::format(
        "lack_delay ({:g}) must exceed playout_deadline - base_delay ({:g}) so unaware receivers "
        "discard covert packets",
        lack_delay, playout_deadline - network.base_delay));
  }
  return out;
}

BitString voice_payload(std::uint64_t seq, std::size_t payload_bits) {
  BitString out(payload_bits);
  std::vector<std::uint8_t> fill(out.bytes().size());
  std::uint64_t word = mix_seed(seq);
  for (std::size_t i = 0; i < fill.size(); ++i) {
    fill[i] = static_cast<std::uint8_t>(word >> (8 * (i % 8)));
  }
  return BitString::from_bytes(fill, payload_bits);
}

std::vector<AudioPacket> generate_stream(const CodecProfile& codec, double duration) {
  if (!(duration > 0.0)) {
    throw DomainError(fmt::format("stream duration must be > 0, got {}", duration));
  }
  // Guard against ratios such as 3.0 / 0.03 landing a hair above an integer.
  const double frames = duration / codec.frame_interval;
  const double nearest = std::round(frames);
  const auto count = static_cast<std::uint64_t>(
      std::abs(frames - nearest) < 1e-9 * std::max(1.0, nearest) ? nearest : std::ceil(frames));

  std::vector<AudioPacket> packets;
  packets.reserve(count);
  for (std::uint64_t seq = 0; seq < count; ++seq) {
    AudioPacket p;
    p.seq = seq;
    p.gen_time = static_cast<double>(seq) * codec.frame_interval;
    p.send_time = p.gen_time;
    p.payload = voice_payload(seq, codec.payload_bits);
    packets.push_back(std::move(p));
  }
  return packets;
}

AudioPacket embed(AudioPacket packet, const BitString& covert_bits, double lack_delay,
                  std::size_t payload_bits) {
  if (packet.kind != PayloadKind::voice) {
    throw FramingError(fmt::format("packet {} already carries covert data", packet.seq));
  }
  if (covert_bits.size() > payload_bits) {
    throw FramingError(fmt::format("{} covert bits do not fit a {}-bit payload",
                                   covert_bits.size(), payload_bits));
  }
  packet.kind = PayloadKind::covert;
  packet.payload = covert_bits.resized(payload_bits);
  packet.send_time = packet.gen_time + lack_delay;
  return packet;
}

std::vector<AudioPacket> transmit(std::vector<AudioPacket> packets, const NetworkModel& network) {
  std::stable_sort(packets.begin(), packets.end(), [](const auto& a, const auto& b) {
    return a.send_time < b.send_time || (a.send_time == b.send_time && a.seq < b.seq);
  });
  Rng rng(network.seed);
  std::normal_distribution<double> jitter(0.0, network.jitter > 0.0 ? network.jitter : 1.0);
  for (auto& p : packets) {
    const bool lost = network.random_loss > 0.0 && uniform_open_closed(rng) <= network.random_loss;
    if (lost) {
      p.arrival_time.reset();
      continue;
    }
    const double extra = network.jitter > 0.0 ? std::max(0.0, jitter(rng)) : 0.0;
    p.arrival_time = p.send_time + network.base_delay + extra;
  }
  return packets;
}

namespace {

std::vector<std::size_t> seq_order(std::span<const AudioPacket> packets) {
  std::vector<std::size_t> idx(packets.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return packets[a].seq < packets[b].seq; });
  return idx;
}

bool plays(const AudioPacket& p, const JitterBufferConfig& buffer) {
  return !p.lost() && *p.arrival_time - p.gen_time <= buffer.playout_deadline;
}

}  // namespace

UnawareReception receive_unaware(std::span<const AudioPacket> packets,
                                 const JitterBufferConfig& buffer) {
  UnawareReception out;
  out.played.reserve(packets.size());
  for (std::size_t i : seq_order(packets)) {
    const auto& p = packets[i];
    if (p.lost()) {
      ++out.lost;
    } else if (plays(p, buffer)) {
      out.played.push_back(p.seq);
    } else {
      ++out.late;
    }
  }
  return out;
}

AwareReception receive_aware(std::span<const AudioPacket> packets,
                             const JitterBufferConfig& buffer) {
  AwareReception out;
  out.played.reserve(packets.size());
  for (std::size_t i : seq_order(packets)) {
    const auto& p = packets[i];
    if (p.lost()) continue;
    if (plays(p, buffer)) {
      out.played.push_back(p.seq);
      continue;
    }
    out.carriers.push_back(p.seq);
    out.extracted.append(p.payload);
    if (p.kind == PayloadKind::voice) ++out.false_covert_reads;
  }
  return out;
}

}  // namespace lacksim
