#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrifield/errors.hpp"

namespace agrifield::modbus {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kReadHoldingRegisters = 0x03;
inline constexpr std::uint8_t kExceptionFlag = 0x80;
inline constexpr std::uint8_t kIllegalFunction = 0x01;
inline constexpr std::uint8_t kIllegalDataAddress = 0x02;
inline constexpr std::uint8_t kIllegalDataValue = 0x03;
inline constexpr std::size_t kMaxFrameLength = 256;
inline constexpr std::uint16_t kMaxReadCount = 125;

/// CRC-16/MODBUS (reflected poly 0xA001, init 0xFFFF, no final xor).
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

struct RtuFrame {
  std::uint8_t address = 1;
  std::uint8_t function = kReadHoldingRegisters;
  Bytes payload;
  std::uint16_t crc = 0;

  /// Builds a frame with the CRC computed over address, function and payload.
  static RtuFrame make(std::uint8_t address, std::uint8_t function, Bytes payload);

  bool is_exception() const { return (function & kExceptionFlag) != 0; }

  friend bool operator==(const RtuFrame&, const RtuFrame&) = default;
};

/// Serializes a frame; the CRC goes on the wire low byte first.
Bytes encode_frame(const RtuFrame& frame);

/// Parses and CRC-checks raw bytes. Throws TruncationError for fewer than
/// four bytes, ChecksumError on CRC mismatch, ProtocolError otherwise.
RtuFrame decode_frame(std::span<const std::uint8_t> bytes);

struct ReadRequest {
  std::uint16_t start_register = 0;
  std::uint16_t count = 1;

  void validate() const;
  friend bool operator==(const ReadRequest&, const ReadRequest&) = default;
};

struct RegisterValues {
  std::vector<std::uint16_t> values;
  friend bool operator==(const RegisterValues&, const RegisterValues&) = default;
};

struct NpkRegisterMap {
  std::uint8_t slave_address = 0x01;
  std::uint16_t n_register = 0x001E;
  std::uint16_t p_register = 0x001F;
  std::uint16_t k_register = 0x0020;

  void validate() const;
  ReadRequest npk_request() const { return {n_register, 3}; }
};

/// Soil nutrient readings in register units, as held by the probe.
struct NpkRegisters {
  std::uint16_t n = 0;
  std::uint16_t p = 0;
  std::uint16_t k = 0;
};

Bytes encode_read_request(const NpkRegisterMap& map, const ReadRequest& req);
Bytes encode_read_request(std::uint8_t address, const ReadRequest& req);
ReadRequest decode_read_request(const RtuFrame& frame);

Bytes encode_read_response(std::uint8_t address, const RegisterValues& regs);
Bytes encode_exception(std::uint8_t address, std::uint8_t function, std::uint8_t code);

/// Thrown when a slave answers with an exception frame.
class ExceptionResponse : public Error {
 public:
  ExceptionResponse(std::uint8_t function, std::uint8_t code);
  std::uint8_t function() const noexcept { return function_; }
  std::uint8_t code() const noexcept { return code_; }

 private:
  std::uint8_t function_;
  std::uint8_t code_;
};

/// Decodes a 0x03 response. Throws ExceptionResponse for exception frames and
/// ProtocolError when the byte count disagrees with `expected_count`.
RegisterValues decode_read_response(const RtuFrame& frame, std::uint16_t expected_count);

/// Simulated NPK probe behaviour for one request. An empty result is bus
/// silence: wrong address or a corrupted request.
std::optional<Bytes> slave_respond(const NpkRegisterMap& map,
                                   std::span<const std::uint8_t> request,
                                   const NpkRegisters& soil);

/// Space separated upper-case hex, e.g. "01 03 00 1E".
std::string to_hex(std::span<const std::uint8_t> bytes);

/// The simulated probe. Requests are handled one at a time.
class NpkSlave {
 public:
  explicit NpkSlave(NpkRegisterMap map = {}, NpkRegisters soil = {});

  void set_soil(const NpkRegisters& soil);
  std::optional<Bytes> handle(std::span<const std::uint8_t> request);
  const NpkRegisterMap& map() const noexcept { return map_; }

 private:
  NpkRegisterMap map_;
  mutable std::mutex mu_;
  NpkRegisters soil_;
};

/// In-process ordered byte link between one master and one slave.
class InProcessLink {
 public:
  using Tap = std::function<void(const char* direction, std::span<const std::uint8_t>)>;

  explicit InProcessLink(NpkSlave& slave) : slave_(slave) {}

  void set_tap(Tap tap) { tap_ = std::move(tap); }
  void write(std::span<const std::uint8_t> bytes);
  /// Pending bytes from the slave; empty on silence.
  Bytes read();

 private:
  NpkSlave& slave_;
  std::deque<std::uint8_t> rx_;
  Tap tap_;
};

/// Master side: issues the NPK read and returns the three registers.
/// Throws ProtocolError on silence.
RegisterValues read_npk(InProcessLink& link, const NpkRegisterMap& map);

}  // namespace agrifield::modbus
