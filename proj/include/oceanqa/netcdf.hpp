// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Reader and writer for the NetCDF classic family (CDF-1, CDF-2 64-bit
// offset, CDF-5). Everything is big-endian on disk. Malformed input raises
// Error(FormatError); nothing reads past the end of the buffer.

namespace oceanqa::netcdf {

enum class Type : std::int32_t {
    Byte = 1,
    Char = 2,
    Short = 3,
    Int = 4,
    Float = 5,
    Double = 6,
    UByte = 7,
    UShort = 8,
    UInt = 9,
    Int64 = 10,
    UInt64 = 11,
};

std::size_t type_size(Type t);

enum class Version : std::uint8_t { Classic = 1, Offset64 = 2, Data64 = 5 };

struct Dimension {
    std::string name;
    std::uint64_t length = 0;  // current length; for the record dimension, numrecs
    bool unlimited = false;
};

struct Attribute {
    std::string name;
    Type type = Type::Char;
    std::string text;             // Char attributes
    std::vector<double> numbers;  // everything else

    static Attribute of_text(std::string name, std::string value);
    static Attribute of_numbers(std::string name, Type type, std::vector<double> values);
};

struct VariableInfo {
    std::string name;
    std::vector<std::size_t> dim_ids;
    std::vector<Attribute> attributes;
    Type type = Type::Double;
    std::uint64_t vsize = 0;
    std::uint64_t begin = 0;
    bool is_record = false;

    const Attribute* attribute(std::string_view attr_name) const;
};

class File {
public:
    static File parse(std::string bytes);

    Version version() const noexcept { return version_; }
    std::uint64_t record_count() const noexcept { return numrecs_; }
    const std::vector<Dimension>& dimensions() const noexcept { return dims_; }
    const std::vector<Attribute>& global_attributes() const noexcept { return gatts_; }
    const std::vector<VariableInfo>& variables() const noexcept { return vars_; }

    const VariableInfo* find_variable(std::string_view name) const;
    /// Throws FormatError when absent.
    const VariableInfo& variable(std::string_view name) const;
    std::vector<std::uint64_t> shape(const VariableInfo& v) const;
    std::vector<std::string> dimension_names(const VariableInfo& v) const;

    /// Raw stored values widened to double (no scale/offset, no masking).
    std::vector<double> read_raw(const VariableInfo& v) const;
    std::string read_text(const VariableInfo& v) const;

private:
    std::shared_ptr<const std::string> bytes_;
    Version version_ = Version::Classic;
    std::uint64_t numrecs_ = 0;
    std::uint64_t recsize_ = 0;
    std::vector<Dimension> dims_;
    std::vector<Attribute> gatts_;
    std::vector<VariableInfo> vars_;
};

/// Variable values after CF unpacking (scale_factor, add_offset) with
/// _FillValue, missing_value and valid range turned into a mask.
struct MaskedArray {
    std::vector<std::uint64_t> shape;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
};

MaskedArray read_masked(const File& file, std::string_view variable);

struct VariableSpec {
    std::string name;
    Type type = Type::Double;
    std::vector<std::string> dims;
    std::vector<Attribute> attributes;
    std::vector<double> data;  // row-major, raw (already packed) values
    std::string text;          // for Char variables
};

/// Builds a classic-format file in memory. At most one dimension may be
/// unlimited; variables whose first dimension is unlimited are record
/// variables and their data length fixes the record count.
class Writer {
public:
    explicit Writer(Version version = Version::Classic) : version_(version) {}

    Writer& add_dimension(std::string name, std::uint64_t length, bool unlimited = false);
    Writer& add_global_attribute(Attribute attr);
    Writer& add_variable(VariableSpec spec);

    std::string serialize() const;

private:
    Version version_;
    std::vector<Dimension> dims_;
    std::vector<Attribute> gatts_;
    std::vector<VariableSpec> vars_;
};

}  // namespace oceanqa::netcdf
