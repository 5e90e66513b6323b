#include "agrifield/modbus.hpp"

#include <array>
#include <cstdio>

#include "agrifield/errors.hpp"

namespace agrifield::modbus {
namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (std::uint16_t i = 0; i < 256; ++i) {
    std::uint16_t crc = i;
    for (int bit = 0; bit < 8; ++bit) crc = (crc & 1) ? (crc >> 1) ^ 0xA001 : crc >> 1;
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u16_be(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get_u16_be(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

void check_address(std::uint8_t address) {
  if (address < 1 || address > 247)
    throw ProtocolError("slave address out of range 1..247: " + std::to_string(address));
}

}  // namespace

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) crc = (crc >> 8) ^ kCrcTable[(crc ^ b) & 0xFF];
  return crc;
}

RtuFrame RtuFrame::make(std::uint8_t address, std::uint8_t function, Bytes payload) {
  RtuFrame f{address, function, std::move(payload), 0};
  Bytes body;
  body.reserve(f.payload.size() + 2);
  body.push_back(address);
  body.push_back(function);
  body.insert(body.end(), f.payload.begin(), f.payload.end());
  f.crc = crc16(body);
  return f;
}

Bytes encode_frame(const RtuFrame& frame) {
  check_address(frame.address);
  if (frame.payload.size() + 4 > kMaxFrameLength) throw ProtocolError("frame exceeds 256 bytes");
  Bytes out;
  out.reserve(frame.payload.size() + 4);
  out.push_back(frame.address);
  out.push_back(frame.function);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  out.push_back(static_cast<std::uint8_t>(frame.crc & 0xFF));
  out.push_back(static_cast<std::uint8_t>(frame.crc >> 8));
  return out;
}

RtuFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4)
    throw TruncationError("frame too short: " + std::to_string(bytes.size()) + " bytes");
  if (bytes.size() > kMaxFrameLength) throw ProtocolError("frame exceeds 256 bytes");
  const std::size_t body_len = bytes.size() - 2;
  const std::uint16_t wire_crc =
      static_cast<std::uint16_t>(bytes[body_len] | (bytes[body_len + 1] << 8));
  const std::uint16_t computed = crc16(bytes.first(body_len));
  if (wire_crc != computed) {
    char msg[64];
    std::snprintf(msg, sizeof msg, "CRC mismatch: wire %04X, computed %04X", wire_crc, computed);
    throw ChecksumError(msg);
  }
  check_address(bytes[0]);
  RtuFrame f;
  f.address = bytes[0];
  f.function = bytes[1];
  f.payload.assign(bytes.begin() + 2, bytes.begin() + static_cast<std::ptrdiff_t>(body_len));
  f.crc = wire_crc;
  return f;
}

void ReadRequest::validate() const {
  if (count < 1 || count > kMaxReadCount)
    throw ProtocolError("register count out of range 1..125: " + std::to_string(count));
  if (static_cast<std::uint32_t>(start_register) + count > 0x10000)
    throw ProtocolError("register range exceeds 0xFFFF");
}

void NpkRegisterMap::validate() const {
  check_address(slave_address);
  if (p_register != n_register + 1 || k_register != p_register + 1)
    throw DomainError("N, P and K registers must be consecutive");
}

Bytes encode_read_request(std::uint8_t address, const ReadRequest& req) {
  req.validate();
  Bytes payload;
  put_u16_be(payload, req.start_register);
  put_u16_be(payload, req.count);
  return encode_frame(RtuFrame::make(address, kReadHoldingRegisters, std::move(payload)));
}

Bytes encode_read_request(const NpkRegisterMap& map, const ReadRequest& req) {
  return encode_read_request(map.slave_address, req);
}

ReadRequest decode_read_request(const RtuFrame& frame) {
  if (frame.function != kReadHoldingRegisters)
    throw ProtocolError("not a read-holding-registers request");
  if (frame.payload.size() != 4) throw ProtocolError("read request payload must be 4 bytes");
  ReadRequest req{get_u16_be(frame.payload, 0), get_u16_be(frame.payload, 2)};
  req.validate();
  return req;
}

Bytes encode_read_response(std::uint8_t address, const RegisterValues& regs) {
  if (regs.values.empty() || regs.values.size() > kMaxReadCount)
    throw ProtocolError("register count out of range 1..125");
  Bytes payload;
  payload.push_back(static_cast<std::uint8_t>(2 * regs.values.size()));
  for (std::uint16_t v : regs.values) put_u16_be(payload, v);
  return encode_frame(RtuFrame::make(address, kReadHoldingRegisters, std::move(payload)));
}

Bytes encode_exception(std::uint8_t address, std::uint8_t function, std::uint8_t code) {
  return encode_frame(
      RtuFrame::make(address, static_cast<std::uint8_t>(function | kExceptionFlag), {code}));
}

ExceptionResponse::ExceptionResponse(std::uint8_t function, std::uint8_t code)
    : Error("modbus exception: function " + std::to_string(function & 0x7F) +
                         ", code " + std::to_string(code)),
      function_(function),
      code_(code) {}

RegisterValues decode_read_response(const RtuFrame& frame, std::uint16_t expected_count) {
  if (frame.is_exception()) {
    if (frame.payload.size() != 1) throw ProtocolError("malformed exception frame");
    throw ExceptionResponse(frame.function, frame.payload[0]);
  }
  if (frame.function != kReadHoldingRegisters) throw ProtocolError("unexpected function code");
  if (frame.payload.empty()) throw ProtocolError("empty read response");
  const std::size_t byte_count = frame.payload[0];
  if (byte_count != frame.payload.size() - 1 || byte_count % 2 != 0)
    throw ProtocolError("byte count does not match payload");
  if (byte_count != 2u * expected_count)
    throw ProtocolError("response carries " + std::to_string(byte_count / 2) +
                        " registers, expected " + std::to_string(expected_count));
  RegisterValues regs;
  for (std::size_t i = 1; i < frame.payload.size(); i += 2)
    regs.values.push_back(get_u16_be(frame.payload, i));
  return regs;
}

std::optional<Bytes> slave_respond(const NpkRegisterMap& map,
                                   std::span<const std::uint8_t> request,
                                   const NpkRegisters& soil) {
  RtuFrame frame;
  try {
    frame = decode_frame(request);
  } catch (const ProtocolError&) {
    return std::nullopt;  // corrupted frames are ignored on the bus
  }
  if (frame.address != map.slave_address) return std::nullopt;
  if (frame.function != kReadHoldingRegisters)
    return encode_exception(map.slave_address, frame.function, kIllegalFunction);
  if (frame.payload.size() != 4)
    return encode_exception(map.slave_address, frame.function, kIllegalDataValue);

  const std::uint16_t start = get_u16_be(frame.payload, 0);
  const std::uint16_t count = get_u16_be(frame.payload, 2);
  if (count < 1 || count > kMaxReadCount)
    return encode_exception(map.slave_address, frame.function, kIllegalDataValue);
  const std::uint32_t first = map.n_register;
  const std::uint32_t last = static_cast<std::uint32_t>(map.k_register);
  if (start < first || static_cast<std::uint32_t>(start) + count - 1 > last)
    return encode_exception(map.slave_address, frame.function, kIllegalDataAddress);

  const std::array<std::uint16_t, 3> bank{soil.n, soil.p, soil.k};
  RegisterValues regs;
  for (std::uint32_t r = start; r < static_cast<std::uint32_t>(start) + count; ++r)
    regs.values.push_back(bank[r - first]);
  return encode_read_response(map.slave_address, regs);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 3);
  char buf[4];
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02X", bytes[i]);
    if (i) out.push_back(' ');
    out += buf;
  }
  return out;
}

NpkSlave::NpkSlave(NpkRegisterMap map, NpkRegisters soil) : map_(map), soil_(soil) {
  map_.validate();
}

void NpkSlave::set_soil(const NpkRegisters& soil) {
  std::lock_guard lock(mu_);
  soil_ = soil;
}

std::optional<Bytes> NpkSlave::handle(std::span<const std::uint8_t> request) {
  std::lock_guard lock(mu_);
  return slave_respond(map_, request, soil_);
}

void InProcessLink::write(std::span<const std::uint8_t> bytes) {
  if (tap_) tap_("tx", bytes);
  if (auto reply = slave_.handle(bytes)) {
    if (tap_) tap_("rx", *reply);
    rx_.insert(rx_.end(), reply->begin(), reply->end());
  }
}

Bytes InProcessLink::read() {
  Bytes out(rx_.begin(), rx_.end());
  rx_.clear();
  return out;
}

RegisterValues read_npk(InProcessLink& link, const NpkRegisterMap& map) {
  const ReadRequest req = map.npk_request();
  link.write(encode_read_request(map, req));
  const Bytes reply = link.read();
  if (reply.empty()) throw ProtocolError("no response from slave " + std::to_string(map.slave_address));
  const RtuFrame frame = decode_frame(reply);
  if (frame.address != map.slave_address) throw ProtocolError("response from unexpected slave");
  return decode_read_response(frame, req.count);
}

}  // namespace agrifield::modbus
