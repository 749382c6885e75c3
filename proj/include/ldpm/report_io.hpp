#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ldpm/analysis.hpp"
#include "ldpm/core.hpp"
#include "ldpm/mechanisms.hpp"

namespace ldpm {

// One report per line: {"mech":...,"user":...} plus the payload fields the
// mechanism uses (bit payloads as 0/1 strings).
std::string report_to_jsonl(uint64_t user, const Report& r);
std::pair<uint64_t, Report> report_from_jsonl(const std::string& line);

// Compact framing: 1-byte mechanism tag (1..7), then varint user id, then
// the payload (varint fields; bit payloads as a varint length plus packed
// bytes, first cell in the high bit).
void append_report_binary(std::vector<uint8_t>& out, uint64_t user,
                          const Report& r);
std::pair<uint64_t, Report> read_report_binary(const std::vector<uint8_t>& buf,
                                               std::size_t& offset);

// Unsigned LEB128.
void append_varint(std::vector<uint8_t>& out, uint64_t value);
uint64_t read_varint(const std::vector<uint8_t>& buf, std::size_t& offset);

// Marginal-table and tree exports for the command-line workflows.
std::string table_to_json(const MarginalTable& table,
                          const std::vector<std::string>& names);
void write_table_csv(std::ostream& out, const MarginalTable& table,
                     const std::vector<std::string>& names);
std::string tree_to_dot(const DependencyTree& tree,
                        const std::vector<std::string>& names);
void write_tree_csv(std::ostream& out, const DependencyTree& tree,
                    const std::vector<std::string>& names);

}  // namespace ldpm
