#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldpm/core.hpp"

namespace ldpm {

struct CategoricalAttribute {
  std::string name;
  uint32_t cardinality = 2;  // >= 2
};

// Maps categorical attributes onto packed binary records: attribute i takes
// ceil(log2 r_i) bits, first attribute in the most significant position.
struct CategoricalSchema {
  std::vector<CategoricalAttribute> attributes;

  int bit_width(std::size_t i) const;
  int total_bits() const;

  static CategoricalSchema all_binary(std::vector<std::string> names);
  static CategoricalSchema from_json(const std::string& text);
  static CategoricalSchema from_json_file(const std::string& path);
};

uint32_t encode_categorical(std::span<const uint32_t> values,
                            const CategoricalSchema& schema);
// Throws on codewords that decode to an out-of-cardinality value.
std::vector<uint32_t> decode_categorical(uint32_t record,
                                         const CategoricalSchema& schema);
bool is_valid_codeword(uint32_t record, const CategoricalSchema& schema);

struct Dataset {
  int d = 0;
  std::vector<uint32_t> records;  // packed attribute words
  std::vector<std::string> attribute_names;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  Distribution empirical() const;  // normalized histogram; throws when empty
};

// Header + comma-separated integer values; double quotes and CRLF accepted.
// Without a schema every column must be 0/1.
Dataset load_csv(const std::string& path);
Dataset load_csv(const std::string& path, const CategoricalSchema& schema);
void save_csv(const Dataset& ds, const std::string& path);
void save_csv(const Dataset& ds, const CategoricalSchema& schema,
              const std::string& path);

// Draw n records from an explicit joint over at most 16 attributes.
Dataset synth_generate(const Distribution& joint, uint64_t n, uint64_t seed);

// Markov chain of overlapping pairwise correlations, usable at any d: the
// first attribute is Bernoulli(base[0]); each later attribute copies its
// predecessor with probability agree[i-1], else draws Bernoulli(base[i]).
struct ChainModel {
  std::vector<double> base;
  std::vector<double> agree;
};
Dataset synth_generate(const ChainModel& model, uint64_t n, uint64_t seed);

// n records with cell counts as close to n * joint as integers allow
// (largest-remainder rounding), in deterministic order.
Dataset quota_population(const Distribution& joint, uint64_t n);

Dataset sample_population(const Dataset& source, uint64_t n, uint64_t seed,
                          bool with_replacement = true);

}  // namespace ldpm
