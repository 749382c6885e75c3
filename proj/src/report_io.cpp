#include "ldpm/report_io.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ldpm/bits.hpp"

namespace ldpm {

namespace {

std::string bits_to_string(const std::vector<uint8_t>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (uint8_t b : bits) s += (b != 0 ? '1' : '0');
  return s;
}

std::vector<uint8_t> bits_from_string(const std::string& s) {
  std::vector<uint8_t> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw std::runtime_error("bad bit payload");
    bits.push_back(c == '1' ? 1 : 0);
  }
  return bits;
}

}  // namespace

std::string report_to_jsonl(uint64_t user, const Report& r) {
  nlohmann::json j;
  j["mech"] = std::string(mechanism_name(r.mechanism));
  j["user"] = user;
  if (is_marginal_mechanism(r.mechanism)) j["marginal"] = r.marginal_mask;
  switch (r.mechanism) {
    case Mechanism::kInpRS:
    case Mechanism::kMargRS:
    case Mechanism::kBS:
      j["bits"] = bits_to_string(r.bits);
      break;
    case Mechanism::kInpPS:
    case Mechanism::kMargPS:
      j["index"] = r.index;
      break;
    case Mechanism::kInpHT:
    case Mechanism::kMargHT:
      j["coeff"] = r.index;
      j["sign"] = static_cast<int>(r.sign);
      break;
  }
  return j.dump();
}

std::pair<uint64_t, Report> report_from_jsonl(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    Report r;
    r.mechanism = mechanism_from_name(j.at("mech").get<std::string>());
    const auto user = j.at("user").get<uint64_t>();
    if (is_marginal_mechanism(r.mechanism)) {
      r.marginal_mask = j.at("marginal").get<uint32_t>();
    }
    switch (r.mechanism) {
      case Mechanism::kInpRS:
      case Mechanism::kMargRS:
      case Mechanism::kBS:
        r.bits = bits_from_string(j.at("bits").get<std::string>());
        break;
      case Mechanism::kInpPS:
      case Mechanism::kMargPS:
        r.index = j.at("index").get<uint32_t>();
        break;
      case Mechanism::kInpHT:
      case Mechanism::kMargHT: {
        r.index = j.at("coeff").get<uint32_t>();
        const int sign = j.at("sign").get<int>();
        if (sign != 1 && sign != -1) throw std::runtime_error("bad sign");
        r.sign = static_cast<int8_t>(sign);
        break;
      }
    }
    return {user, r};
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& e) {
    // nlohmann parse/type errors and name lookups become data errors here:
    // a broken report file is a runtime problem, not a configuration one.
    throw std::runtime_error(std::string("malformed report line: ") + e.what());
  }
}

void append_varint(std::vector<uint8_t>& out, uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<uint8_t>(value) | 0x80);
    value >>= 7;
  }
  out.push_back(static_cast<uint8_t>(value));
}

uint64_t read_varint(const std::vector<uint8_t>& buf, std::size_t& offset) {
  uint64_t value = 0;
  int shift = 0;
  while (true) {
    if (offset >= buf.size()) throw std::runtime_error("truncated varint");
    if (shift >= 64) throw std::runtime_error("oversized varint");
    const uint8_t byte = buf[offset++];
    value |= static_cast<uint64_t>(byte & 0x7f) << shift;
    if ((byte & 0x80) == 0) return value;
    shift += 7;
  }
}

namespace {

void append_packed_bits(std::vector<uint8_t>& out,
                        const std::vector<uint8_t>& bits) {
  append_varint(out, bits.size());
  uint8_t cur = 0;
  int used = 0;
  for (uint8_t b : bits) {
    cur = static_cast<uint8_t>((cur << 1) | (b & 1));
    if (++used == 8) {
      out.push_back(cur);
      cur = 0;
      used = 0;
    }
  }
  if (used > 0) out.push_back(static_cast<uint8_t>(cur << (8 - used)));
}

std::vector<uint8_t> read_packed_bits(const std::vector<uint8_t>& buf,
                                      std::size_t& offset) {
  const uint64_t count = read_varint(buf, offset);
  const std::size_t bytes = (count + 7) / 8;
  if (offset + bytes > buf.size()) throw std::runtime_error("truncated payload");
  std::vector<uint8_t> bits(count);
  for (uint64_t i = 0; i < count; ++i) {
    const uint8_t byte = buf[offset + i / 8];
    bits[i] = (byte >> (7 - (i % 8))) & 1;
  }
  offset += bytes;
  return bits;
}

}  // namespace

void append_report_binary(std::vector<uint8_t>& out, uint64_t user,
                          const Report& r) {
  out.push_back(static_cast<uint8_t>(r.mechanism) + 1);
  append_varint(out, user);
  if (is_marginal_mechanism(r.mechanism)) append_varint(out, r.marginal_mask);
  switch (r.mechanism) {
    case Mechanism::kInpRS:
    case Mechanism::kMargRS:
    case Mechanism::kBS:
      append_packed_bits(out, r.bits);
      break;
    case Mechanism::kInpPS:
    case Mechanism::kMargPS:
      append_varint(out, r.index);
      break;
    case Mechanism::kInpHT:
    case Mechanism::kMargHT:
      append_varint(out, r.index);
      out.push_back(r.sign == 1 ? 1 : 0);
      break;
  }
}

std::pair<uint64_t, Report> read_report_binary(const std::vector<uint8_t>& buf,
                                               std::size_t& offset) {
  if (offset >= buf.size()) throw std::runtime_error("truncated report");
  const uint8_t tag = buf[offset++];
  if (tag < 1 || tag > kMechanismCount) throw std::runtime_error("bad tag");
  Report r;
  r.mechanism = static_cast<Mechanism>(tag - 1);
  const uint64_t user = read_varint(buf, offset);
  if (is_marginal_mechanism(r.mechanism)) {
    r.marginal_mask = static_cast<uint32_t>(read_varint(buf, offset));
  }
  switch (r.mechanism) {
    case Mechanism::kInpRS:
    case Mechanism::kMargRS:
    case Mechanism::kBS:
      r.bits = read_packed_bits(buf, offset);
      break;
    case Mechanism::kInpPS:
    case Mechanism::kMargPS:
      r.index = static_cast<uint32_t>(read_varint(buf, offset));
      break;
    case Mechanism::kInpHT:
    case Mechanism::kMargHT: {
      r.index = static_cast<uint32_t>(read_varint(buf, offset));
      if (offset >= buf.size()) throw std::runtime_error("truncated report");
      r.sign = buf[offset++] != 0 ? 1 : -1;
      break;
    }
  }
  return {user, r};
}

namespace {

std::string cell_label(uint32_t cell, const MarginalSpec& spec,
                       const std::vector<std::string>& names) {
  // Attribute positions inside beta, most significant first.
  std::string label;
  int seen = 0;
  const int k = spec.k();
  for (int attr = 0; attr < spec.d; ++attr) {
    if ((spec.beta & attribute_bit(spec.d, attr)) == 0) continue;
    const int bitpos = k - 1 - seen;
    const int value = (cell >> bitpos) & 1;
    if (!label.empty()) label += ",";
    const std::string name = static_cast<std::size_t>(attr) < names.size()
                                 ? names[attr]
                                 : "x" + std::to_string(attr);
    label += name + "=" + std::to_string(value);
    ++seen;
  }
  return label;
}

std::string node_name(int node, const std::vector<std::string>& names) {
  return static_cast<std::size_t>(node) < names.size()
             ? names[node]
             : "x" + std::to_string(node);
}

}  // namespace

std::string table_to_json(const MarginalTable& table,
                          const std::vector<std::string>& names) {
  nlohmann::json j;
  j["d"] = table.spec.d;
  j["marginal"] = table.spec.beta;
  nlohmann::json cells = nlohmann::json::array();
  for (uint32_t c = 0; c < table.cells.size(); ++c) {
    cells.push_back({{"cell", cell_label(c, table.spec, names)},
                     {"mass", table.cells[c]}});
  }
  j["cells"] = cells;
  return j.dump();
}

void write_table_csv(std::ostream& out, const MarginalTable& table,
                     const std::vector<std::string>& names) {
  out << "cell,mass\n";
  for (uint32_t c = 0; c < table.cells.size(); ++c) {
    out << '"' << cell_label(c, table.spec, names) << '"' << ','
        << table.cells[c] << '\n';
  }
}

std::string tree_to_dot(const DependencyTree& tree,
                        const std::vector<std::string>& names) {
  std::string dot = "graph dependency {\n";
  for (int v = 0; v < tree.nodes; ++v) {
    dot += "  n" + std::to_string(v) + " [label=\"" + node_name(v, names) +
           "\"];\n";
  }
  for (const TreeEdge& e : tree.edges) {
    dot += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) +
           " [label=\"" + std::to_string(e.weight) + "\"];\n";
  }
  dot += "}\n";
  return dot;
}

void write_tree_csv(std::ostream& out, const DependencyTree& tree,
                    const std::vector<std::string>& names) {
  out << "a,b,weight\n";
  for (const TreeEdge& e : tree.edges) {
    out << node_name(e.a, names) << ',' << node_name(e.b, names) << ','
        << e.weight << '\n';
  }
}

}  // namespace ldpm
