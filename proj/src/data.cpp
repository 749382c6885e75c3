#include "ldpm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ldpm/rng.hpp"

namespace ldpm {

namespace {

int width_for(uint32_t cardinality) {
  if (cardinality < 2) {
    throw std::invalid_argument("attribute cardinality must be >= 2");
  }
  int w = 0;
  while ((uint64_t{1} << w) < cardinality) ++w;
  return std::max(w, 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quote in CSV line");
  fields.push_back(std::move(field));
  return fields;
}

uint32_t parse_value(const std::string& field) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(field, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("non-integer CSV value: '" + field + "'");
  }
  if (used != field.size()) {
    throw std::runtime_error("non-integer CSV value: '" + field + "'");
  }
  return static_cast<uint32_t>(v);
}

Dataset load_csv_impl(const std::string& path,
                      const CategoricalSchema* schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);

  CategoricalSchema effective;
  if (schema != nullptr) {
    if (header.size() != schema->attributes.size()) {
      throw std::runtime_error("CSV column count does not match schema");
    }
    effective = *schema;
  } else {
    effective = CategoricalSchema::all_binary(header);
  }

  Dataset ds;
  ds.d = effective.total_bits();
  validate_dimension(ds.d);
  // Attribute names label BITS.  A column wider than one bit contributes one
  // name per bit, suffixed by the bit's position within the column.
  for (std::size_t i = 0; i < header.size(); ++i) {
    const int width = effective.bit_width(i);
    if (width == 1) {
      ds.attribute_names.push_back(header[i]);
    } else {
      for (int b = 0; b < width; ++b) {
        ds.attribute_names.push_back(header[i] + "." + std::to_string(b));
      }
    }
  }
  ds.provenance = path;

  std::vector<uint32_t> values(header.size());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("CSV row has wrong number of fields");
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      values[i] = parse_value(fields[i]);
      if (values[i] >= effective.attributes[i].cardinality) {
        throw std::runtime_error("CSV value out of range for attribute '" +
                                 effective.attributes[i].name + "'");
      }
    }
    ds.records.push_back(encode_categorical(values, effective));
  }
  return ds;
}

}  // namespace

int CategoricalSchema::bit_width(std::size_t i) const {
  return width_for(attributes.at(i).cardinality);
}

int CategoricalSchema::total_bits() const {
  int total = 0;
  for (std::size_t i = 0; i < attributes.size(); ++i) total += bit_width(i);
  return total;
}

CategoricalSchema CategoricalSchema::all_binary(std::vector<std::string> names) {
  CategoricalSchema s;
  s.attributes.reserve(names.size());
  for (auto& n : names) s.attributes.push_back({std::move(n), 2});
  return s;
}

CategoricalSchema CategoricalSchema::from_json(const std::string& text) {
  // The schema is configuration, so every defect here is an invalid-argument
  // error (the command-line tool maps those to its configuration exit code).
  try {
    const auto parsed = nlohmann::json::parse(text);
    const nlohmann::json* list = &parsed;
    if (parsed.is_object()) {
      if (!parsed.contains("attributes")) {
        throw std::invalid_argument("schema JSON needs an 'attributes' array");
      }
      list = &parsed.at("attributes");
    }
    if (!list->is_array() || list->empty()) {
      throw std::invalid_argument("schema JSON must be a non-empty array");
    }
    CategoricalSchema s;
    for (const auto& item : *list) {
      CategoricalAttribute a;
      a.name = item.at("name").get<std::string>();
      a.cardinality = item.at("cardinality").get<uint32_t>();
      if (a.cardinality < 2) {
        throw std::invalid_argument("attribute cardinality must be >= 2");
      }
      s.attributes.push_back(std::move(a));
    }
    return s;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("invalid schema JSON: ") +
                                e.what());
  }
}

CategoricalSchema CategoricalSchema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

uint32_t encode_categorical(std::span<const uint32_t> values,
                            const CategoricalSchema& schema) {
  if (values.size() != schema.attributes.size()) {
    throw std::invalid_argument("value count does not match schema");
  }
  validate_dimension(schema.total_bits());
  uint32_t out = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= schema.attributes[i].cardinality) {
      throw std::invalid_argument("value out of range for attribute '" +
                                  schema.attributes[i].name + "'");
    }
    out = (out << schema.bit_width(i)) | values[i];
  }
  return out;
}

std::vector<uint32_t> decode_categorical(uint32_t record,
                                         const CategoricalSchema& schema) {
  const int total = schema.total_bits();
  validate_dimension(total);
  if ((record >> total) != 0) {
    throw std::invalid_argument("record has bits beyond the schema");
  }
  std::vector<uint32_t> values(schema.attributes.size());
  int shift = total;
  for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
    const int w = schema.bit_width(i);
    shift -= w;
    values[i] = (record >> shift) & ((1u << w) - 1);
    if (values[i] >= schema.attributes[i].cardinality) {
      throw std::invalid_argument("invalid codeword for attribute '" +
                                  schema.attributes[i].name + "'");
    }
  }
  return values;
}

bool is_valid_codeword(uint32_t record, const CategoricalSchema& schema) {
  try {
    decode_categorical(record, schema);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

Distribution Dataset::empirical() const {
  if (records.empty()) throw std::runtime_error("empty dataset");
  Distribution t(d);
  const double unit = 1.0 / static_cast<double>(records.size());
  for (uint32_t r : records) {
    if ((std::size_t{r} >> d) != 0) {
      throw std::runtime_error("record has bits beyond the dimension");
    }
    t.cells[r] += unit;
  }
  return t;
}

Dataset load_csv(const std::string& path) { return load_csv_impl(path, nullptr); }

Dataset load_csv(const std::string& path, const CategoricalSchema& schema) {
  return load_csv_impl(path, &schema);
}

namespace {

void save_csv_impl(const Dataset& ds, const CategoricalSchema* schema,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  // Column headers: the schema's names for categorical output (the dataset's
  // own names label bits, not columns), the dataset's names otherwise.
  const std::size_t cols =
      schema != nullptr ? schema->attributes.size() : static_cast<std::size_t>(ds.d);
  for (std::size_t i = 0; i < cols; ++i) {
    if (i > 0) out << ',';
    if (schema != nullptr) {
      out << schema->attributes[i].name;
    } else if (i < ds.attribute_names.size()) {
      out << ds.attribute_names[i];
    } else {
      out << "x" << i;
    }
  }
  out << '\n';
  for (uint32_t r : ds.records) {
    if (schema != nullptr) {
      const auto values = decode_categorical(r, *schema);
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out << ',';
        out << values[i];
      }
    } else {
      for (int attr = 0; attr < ds.d; ++attr) {
        if (attr > 0) out << ',';
        out << ((r & attribute_bit(ds.d, attr)) != 0 ? 1 : 0);
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing CSV file: " + path);
}

}  // namespace

void save_csv(const Dataset& ds, const std::string& path) {
  save_csv_impl(ds, nullptr, path);
}

void save_csv(const Dataset& ds, const CategoricalSchema& schema,
              const std::string& path) {
  save_csv_impl(ds, &schema, path);
}

Dataset synth_generate(const Distribution& joint, uint64_t n, uint64_t seed) {
  if (joint.d > 16) {
    throw std::invalid_argument(
        "explicit joint sampling limited to 16 attributes; use the chain model");
  }
  if (!is_distribution(joint.cells)) {
    throw std::invalid_argument("joint table is not a distribution");
  }
  std::vector<double> cdf(joint.size());
  std::partial_sum(joint.cells.begin(), joint.cells.end(), cdf.begin());
  cdf.back() = 1.0;
  Dataset ds;
  ds.d = joint.d;
  ds.records.resize(n);
  ds.provenance = "synth:joint";
  for (uint64_t i = 0; i < n; ++i) {
    SplitRng rng = SplitRng::for_user(seed, i);
    const double u = rng.next_double();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ds.records[i] = static_cast<uint32_t>(it - cdf.begin());
  }
  for (int attr = 0; attr < ds.d; ++attr) {
    ds.attribute_names.push_back("x" + std::to_string(attr));
  }
  return ds;
}

Dataset synth_generate(const ChainModel& model, uint64_t n, uint64_t seed) {
  const int d = static_cast<int>(model.base.size());
  validate_dimension(d);
  if (model.agree.size() + 1 != model.base.size()) {
    throw std::invalid_argument("chain model needs d-1 agreement probabilities");
  }
  for (double p : model.base) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability out of [0,1]");
  }
  for (double p : model.agree) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability out of [0,1]");
  }
  Dataset ds;
  ds.d = d;
  ds.records.resize(n);
  ds.provenance = "synth:chain";
  for (uint64_t i = 0; i < n; ++i) {
    SplitRng rng = SplitRng::for_user(seed, i);
    uint32_t word = 0;
    bool prev = rng.bernoulli(model.base[0]);
    if (prev) word |= attribute_bit(d, 0);
    for (int attr = 1; attr < d; ++attr) {
      bool value;
      if (rng.bernoulli(model.agree[attr - 1])) {
        value = prev;
      } else {
        value = rng.bernoulli(model.base[attr]);
      }
      if (value) word |= attribute_bit(d, attr);
      prev = value;
    }
    ds.records[i] = word;
  }
  for (int attr = 0; attr < d; ++attr) {
    ds.attribute_names.push_back("x" + std::to_string(attr));
  }
  return ds;
}

Dataset quota_population(const Distribution& joint, uint64_t n) {
  if (!is_distribution(joint.cells)) {
    throw std::invalid_argument("joint table is not a distribution");
  }
  if (n == 0) throw std::invalid_argument("population must be non-empty");
  const std::size_t m = joint.size();
  std::vector<uint64_t> quota(m);
  std::vector<std::pair<double, uint32_t>> remainder(m);
  uint64_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double exact = joint.cells[i] * static_cast<double>(n);
    quota[i] = static_cast<uint64_t>(exact);
    assigned += quota[i];
    remainder[i] = {exact - std::floor(exact), static_cast<uint32_t>(i)};
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    ++quota[remainder[i % m].second];
  }
  Dataset ds;
  ds.d = joint.d;
  ds.provenance = "synth:quota";
  ds.records.reserve(n);
  for (std::size_t i = 0; i < m; ++i) {
    ds.records.insert(ds.records.end(), quota[i], static_cast<uint32_t>(i));
  }
  for (int attr = 0; attr < ds.d; ++attr) {
    ds.attribute_names.push_back("x" + std::to_string(attr));
  }
  return ds;
}

Dataset sample_population(const Dataset& source, uint64_t n, uint64_t seed,
                          bool with_replacement) {
  if (source.records.empty()) throw std::invalid_argument("empty source dataset");
  Dataset ds;
  ds.d = source.d;
  ds.attribute_names = source.attribute_names;
  ds.provenance = source.provenance + ":sample";
  ds.records.reserve(n);
  const auto size = static_cast<uint32_t>(source.records.size());
  if (with_replacement) {
    for (uint64_t i = 0; i < n; ++i) {
      SplitRng rng = SplitRng::for_user(seed, i);
      ds.records.push_back(source.records[rng.below(size)]);
    }
  } else {
    if (n > source.records.size()) {
      throw std::invalid_argument("cannot draw more records than the source has");
    }
    std::vector<uint32_t> order(source.records.size());
    std::iota(order.begin(), order.end(), 0);
    SplitRng rng(seed);
    for (uint64_t i = 0; i < n; ++i) {
      const uint32_t j =
          static_cast<uint32_t>(i) + rng.below(size - static_cast<uint32_t>(i));
      std::swap(order[i], order[j]);
      ds.records.push_back(source.records[order[i]]);
    }
  }
  return ds;
}

}  // namespace ldpm
