#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lacksim/insertion_scheduler.hpp"
#include "lacksim/random.hpp"

namespace lacksim {

class FramingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bit sequence with MSB-first packing. Bits past size() in the last byte are
/// always zero, so equality is bytewise.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t nbits) : bytes_((nbits + 7) / 8, 0), size_(nbits) {}

  static BitString from_bytes(std::span<const std::uint8_t> bytes);
  static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);
  static BitString random(std::size_t nbits, Rng& rng);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool get(std::size_t i) const;
  void set(std::size_t i, bool value);

  void append(const BitString& other);
  BitString slice(std::size_t offset, std::size_t count) const;
  /// Copy resized to nbits: truncated, or padded with zero bits.
  BitString resized(std::size_t nbits) const;

  /// Packed bytes; a partial final byte is zero-padded.
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

enum class PayloadKind { voice, covert };

struct AudioPacket {
  std::uint64_t seq = 0;
  double gen_time = 0.0;
  double send_time = 0.0;
  std::optional<double> arrival_time;  // empty when lost in the network
  BitString payload;
  PayloadKind kind = PayloadKind::voice;

  bool lost() const noexcept { return !arrival_time.has_value(); }
};

struct NetworkModel {
  double base_delay = 0.05;   // s
  double jitter = 0.0;        // std-dev of the Gaussian delay term, s
  double random_loss = 0.0;   // per-packet loss probability
  std::uint64_t seed = 0;
};

struct JitterBufferConfig {
  double playout_deadline = 0.15;  // max lag after gen_time at which a packet still plays
  double lack_delay = 0.2;         // intentional delay on covert packets

  /// Smallest-margin delay that still guarantees discard at an unaware
  /// receiver: playout_deadline - base_delay + 0.1 s.
  static double default_lack_delay(double playout_deadline, double base_delay) {
    return playout_deadline - base_delay + 0.1;
  }

  /// Constraint violations against a network; empty when consistent.
  std::vector<std::string> violations(const NetworkModel& network) const;
};

/// ceil(duration / frame_interval) voice packets with gen_time = seq * frame_interval.
std::vector<AudioPacket> generate_stream(const CodecProfile& codec, double duration);

/// Synthetic voice payload derived from the sequence number.
BitString voice_payload(std::uint64_t seq, std::size_t payload_bits);

/// Turns a voice packet into a covert carrier: payload replaced (zero padded
/// to payload_bits) and transmission delayed by lack_delay.
AudioPacket embed(AudioPacket packet, const BitString& covert_bits, double lack_delay,
                  std::size_t payload_bits);

/// Applies random loss and delay. Packets are processed in send order and
/// returned in that order.
std::vector<AudioPacket> transmit(std::vector<AudioPacket> packets, const NetworkModel& network);

struct UnawareReception {
  std::vector<std::uint64_t> played;  // seq numbers, in seq order
  std::size_t lost = 0;
  std::size_t late = 0;
  std::size_t discarded() const noexcept { return lost + late; }
};

struct AwareReception {
  std::vector<std::uint64_t> played;
  std::vector<std::uint64_t> carriers;  // seq numbers read as covert, in seq order
  BitString extracted;                  // concatenated carrier payloads
  std::size_t false_covert_reads = 0;   // carriers that were really late voice packets
};

UnawareReception receive_unaware(std::span<const AudioPacket> packets,
                                 const JitterBufferConfig& buffer);

/// A packet that arrives later than the playout deadline is read as covert;
/// identification is purely by timing.
AwareReception receive_aware(std::span<const AudioPacket> packets,
                             const JitterBufferConfig& buffer);

}  // namespace lacksim
