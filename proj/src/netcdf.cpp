// SPDX-License-Identifier: Apache-2.0
#include "oceanqa/netcdf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>

#include "oceanqa/error.hpp"

namespace oceanqa::netcdf {

namespace {

constexpr std::uint32_t kTagDimension = 0x0A;
constexpr std::uint32_t kTagVariable = 0x0B;
constexpr std::uint32_t kTagAttribute = 0x0C;
constexpr std::uint32_t kStreaming = 0xFFFFFFFFu;

[[noreturn]] void format_error(std::string message) {
    throw Error(ErrorCode::FormatError, "netcdf: " + std::move(message));
}

std::uint64_t pad4(std::uint64_t n) { return (n + 3) & ~std::uint64_t{3}; }

bool valid_type(std::int32_t t, Version v) {
    if (t >= 1 && t <= 6) return true;
    return v == Version::Data64 && t >= 7 && t <= 11;
}

class Cursor {
public:
    Cursor(const std::string& bytes, Version version) : bytes_(bytes), version_(version) {}

    std::size_t pos() const { return pos_; }

    void need(std::uint64_t n) const {
        if (n > bytes_.size() || pos_ > bytes_.size() - n)
            format_error(fmt::format("truncated header at byte {}", pos_));
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + i]);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + i]);
        pos_ += 8;
        return v;
    }

    // NON_NEG counts are 64-bit only in CDF-5.
    std::uint64_t count() { return version_ == Version::Data64 ? u64() : u32(); }
    std::uint64_t offset() { return version_ == Version::Classic ? u32() : u64(); }

    std::string_view take(std::uint64_t n) {
        need(n);
        std::string_view out(bytes_.data() + pos_, n);
        pos_ += n;
        return out;
    }

    void skip_padding(std::uint64_t n) {
        const auto padded = pad4(n) - n;
        need(padded);
        pos_ += padded;
    }

    std::string name() {
        const auto len = count();
        auto s = take(len);
        skip_padding(len);
        return std::string(s);
    }

private:
    const std::string& bytes_;
    Version version_;
    std::size_t pos_ = 4;
};

double decode_element(const char* p, Type t) {
    auto load = [p](int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 8) | static_cast<unsigned char>(p[i]);
        return v;
    };
    switch (t) {
        case Type::Byte: return static_cast<std::int8_t>(load(1));
        case Type::Char: return static_cast<unsigned char>(p[0]);
        case Type::UByte: return static_cast<double>(load(1));
        case Type::Short: return static_cast<std::int16_t>(load(2));
        case Type::UShort: return static_cast<double>(load(2));
        case Type::Int: return static_cast<std::int32_t>(load(4));
        case Type::UInt: return static_cast<double>(load(4));
        case Type::Float: return std::bit_cast<float>(static_cast<std::uint32_t>(load(4)));
        case Type::Double: return std::bit_cast<double>(load(8));
        case Type::Int64: return static_cast<double>(static_cast<std::int64_t>(load(8)));
        case Type::UInt64: return static_cast<double>(load(8));
    }
    return 0.0;
}

void encode_element(std::string& out, double v, Type t) {
    auto store = [&out](std::uint64_t bits, int n) {
        for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    };
    switch (t) {
        case Type::Byte: store(static_cast<std::uint8_t>(static_cast<std::int8_t>(std::llround(v))), 1); break;
        case Type::Char:
        case Type::UByte: store(static_cast<std::uint8_t>(std::llround(v)), 1); break;
        case Type::Short: store(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::llround(v))), 2); break;
        case Type::UShort: store(static_cast<std::uint16_t>(std::llround(v)), 2); break;
        case Type::Int: store(static_cast<std::uint32_t>(static_cast<std::int32_t>(std::llround(v))), 4); break;
        case Type::UInt: store(static_cast<std::uint32_t>(std::llround(v)), 4); break;
        case Type::Float: store(std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4); break;
        case Type::Double: store(std::bit_cast<std::uint64_t>(v), 8); break;
        case Type::Int64: store(static_cast<std::uint64_t>(std::llround(v)), 8); break;
        case Type::UInt64: store(static_cast<std::uint64_t>(v), 8); break;
    }
}

std::vector<Attribute> read_attributes(Cursor& c, Version version) {
    std::vector<Attribute> out;
    const auto tag = c.u32();
    const auto n = c.count();
    if (tag == 0 && n == 0) return out;
    if (tag != kTagAttribute) format_error(fmt::format("expected attribute list tag, found {:#x}", tag));
    for (std::uint64_t i = 0; i < n; ++i) {
        Attribute a;
        a.name = c.name();
        const auto raw_type = static_cast<std::int32_t>(c.u32());
        if (!valid_type(raw_type, version)) format_error(fmt::format("attribute {} has bad type {}", a.name, raw_type));
        a.type = static_cast<Type>(raw_type);
        const auto nelems = c.count();
        const auto size = type_size(a.type);
        if (nelems > std::numeric_limits<std::uint64_t>::max() / size) format_error("attribute too large");
        auto payload = c.take(nelems * size);
        c.skip_padding(nelems * size);
        if (a.type == Type::Char) {
            a.text.assign(payload.data(), payload.size());
            while (!a.text.empty() && a.text.back() == '\0') a.text.pop_back();
        } else {
            a.numbers.reserve(nelems);
            for (std::uint64_t k = 0; k < nelems; ++k) a.numbers.push_back(decode_element(payload.data() + k * size, a.type));
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::uint64_t checked_product(const std::vector<std::uint64_t>& dims, std::uint64_t limit) {
    std::uint64_t n = 1;
    for (auto d : dims) {
        if (d != 0 && n > limit / d) format_error("variable shape exceeds file size");
        n *= d;
    }
    return n;
}

}  // namespace

std::size_t type_size(Type t) {
    switch (t) {
        case Type::Byte:
        case Type::Char:
        case Type::UByte: return 1;
        case Type::Short:
        case Type::UShort: return 2;
        case Type::Int:
        case Type::UInt:
        case Type::Float: return 4;
        case Type::Double:
        case Type::Int64:
        case Type::UInt64: return 8;
    }
    return 1;
}

Attribute Attribute::of_text(std::string name, std::string value) {
    Attribute a;
    a.name = std::move(name);
    a.type = Type::Char;
    a.text = std::move(value);
    return a;
}

Attribute Attribute::of_numbers(std::string name, Type type, std::vector<double> values) {
    Attribute a;
    a.name = std::move(name);
    a.type = type;
    a.numbers = std::move(values);
    return a;
}

const Attribute* VariableInfo::attribute(std::string_view attr_name) const {
    for (const auto& a : attributes)
        if (a.name == attr_name) return &a;
    return nullptr;
}

File File::parse(std::string bytes) {
    File f;
    if (bytes.size() < 4 || bytes.compare(0, 3, "CDF") != 0) format_error("missing CDF magic");
    const auto ver = static_cast<std::uint8_t>(bytes[3]);
    if (ver != 1 && ver != 2 && ver != 5) format_error(fmt::format("unsupported format version {}", ver));
    f.version_ = static_cast<Version>(ver);
    f.bytes_ = std::make_shared<const std::string>(std::move(bytes));
    const std::string& b = *f.bytes_;
    Cursor c(b, f.version_);

    const auto numrecs = c.count();
    const bool streaming = f.version_ != Version::Data64 ? numrecs == kStreaming
                                                         : numrecs == std::numeric_limits<std::uint64_t>::max();

    // dimensions
    {
        const auto tag = c.u32();
        const auto n = c.count();
        if (!(tag == 0 && n == 0)) {
            if (tag != kTagDimension) format_error(fmt::format("expected dimension list tag, found {:#x}", tag));
            if (n > b.size()) format_error("dimension count exceeds file size");
            for (std::uint64_t i = 0; i < n; ++i) {
                Dimension d;
                d.name = c.name();
                d.length = c.count();
                d.unlimited = d.length == 0;
                f.dims_.push_back(std::move(d));
            }
        }
    }
    std::size_t unlimited_count = 0;
    for (const auto& d : f.dims_) unlimited_count += d.unlimited ? 1 : 0;
    if (unlimited_count > 1) format_error("more than one unlimited dimension");

    f.gatts_ = read_attributes(c, f.version_);

    // variables
    {
        const auto tag = c.u32();
        const auto n = c.count();
        if (!(tag == 0 && n == 0)) {
            if (tag != kTagVariable) format_error(fmt::format("expected variable list tag, found {:#x}", tag));
            if (n > b.size()) format_error("variable count exceeds file size");
            for (std::uint64_t i = 0; i < n; ++i) {
                VariableInfo v;
                v.name = c.name();
                const auto ndims = c.count();
                if (ndims > 1024) format_error("variable " + v.name + " has too many dimensions");
                for (std::uint64_t k = 0; k < ndims; ++k) {
                    const auto id = c.count();
                    if (id >= f.dims_.size()) format_error("variable " + v.name + " references unknown dimension");
                    if (k > 0 && f.dims_[id].unlimited)
                        format_error("variable " + v.name + " uses the record dimension in a non-leading position");
                    v.dim_ids.push_back(static_cast<std::size_t>(id));
                }
                v.attributes = read_attributes(c, f.version_);
                const auto raw_type = static_cast<std::int32_t>(c.u32());
                if (!valid_type(raw_type, f.version_))
                    format_error(fmt::format("variable {} has bad type {}", v.name, raw_type));
                v.type = static_cast<Type>(raw_type);
                v.vsize = c.count();
                v.begin = c.offset();
                v.is_record = !v.dim_ids.empty() && f.dims_[v.dim_ids.front()].unlimited;
                f.vars_.push_back(std::move(v));
            }
        }
    }

    std::size_t record_vars = 0;
    std::uint64_t first_record_begin = std::numeric_limits<std::uint64_t>::max();
    for (const auto& v : f.vars_) {
        if (!v.is_record) continue;
        ++record_vars;
        first_record_begin = std::min(first_record_begin, v.begin);
        f.recsize_ += v.vsize;
    }
    if (record_vars == 1) {
        for (const auto& v : f.vars_) {
            if (!v.is_record) continue;
            std::vector<std::uint64_t> inner;
            for (std::size_t k = 1; k < v.dim_ids.size(); ++k) inner.push_back(f.dims_[v.dim_ids[k]].length);
            f.recsize_ = checked_product(inner, b.size()) * type_size(v.type);
        }
    }
    if (streaming) {
        f.numrecs_ = (record_vars == 0 || f.recsize_ == 0 || first_record_begin > b.size())
                         ? 0
                         : (b.size() - first_record_begin) / f.recsize_;
    } else {
        f.numrecs_ = numrecs;
    }
    for (auto& d : f.dims_)
        if (d.unlimited) d.length = f.numrecs_;
    if (record_vars > 0 && f.recsize_ > 0 && f.numrecs_ > b.size() / f.recsize_ + 1)
        format_error("record count exceeds file size");
    return f;
}

const VariableInfo* File::find_variable(std::string_view name) const {
    for (const auto& v : vars_)
        if (v.name == name) return &v;
    return nullptr;
}

const VariableInfo& File::variable(std::string_view name) const {
    if (auto* v = find_variable(name)) return *v;
    format_error("no variable named '" + std::string(name) + "'");
}

std::vector<std::uint64_t> File::shape(const VariableInfo& v) const {
    std::vector<std::uint64_t> out;
    for (auto id : v.dim_ids) out.push_back(dims_[id].length);
    return out;
}

std::vector<std::string> File::dimension_names(const VariableInfo& v) const {
    std::vector<std::string> out;
    for (auto id : v.dim_ids) out.push_back(dims_[id].name);
    return out;
}

std::vector<double> File::read_raw(const VariableInfo& v) const {
    const std::string& b = *bytes_;
    const auto size = type_size(v.type);
    auto sh = shape(v);
    std::vector<double> out;
    if (!v.is_record) {
        const auto n = checked_product(sh, b.size());
        const auto bytes = n * size;
        if (v.begin > b.size() || bytes > b.size() - v.begin)
            format_error(fmt::format("variable {} data lies outside the file", v.name));
        out.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(decode_element(b.data() + v.begin + i * size, v.type));
        return out;
    }
    std::vector<std::uint64_t> inner(sh.begin() + 1, sh.end());
    const auto per_record = checked_product(inner, b.size());
    const auto record_bytes = per_record * size;
    if (numrecs_ > 0 && per_record > 0 && numrecs_ > b.size() / record_bytes + 1)
        format_error(fmt::format("variable {} records exceed file size", v.name));
    out.reserve(numrecs_ * per_record);
    for (std::uint64_t r = 0; r < numrecs_; ++r) {
        if (recsize_ != 0 && r > (b.size() - std::min<std::uint64_t>(b.size(), v.begin)) / recsize_ + 1)
            format_error(fmt::format("variable {} record {} lies outside the file", v.name, r));
        const std::uint64_t offset = v.begin + r * recsize_;
        if (offset > b.size() || record_bytes > b.size() - offset)
            format_error(fmt::format("variable {} record {} lies outside the file", v.name, r));
        for (std::uint64_t i = 0; i < per_record; ++i)
            out.push_back(decode_element(b.data() + offset + i * size, v.type));
    }
    return out;
}

std::string File::read_text(const VariableInfo& v) const {
    if (v.type != Type::Char) format_error("variable " + v.name + " is not a character variable");
    auto raw = read_raw(v);
    std::string out;
    for (double c : raw) out.push_back(static_cast<char>(static_cast<unsigned char>(c)));
    while (!out.empty() && out.back() == '\0') out.pop_back();
    return out;
}

namespace {

std::optional<double> default_fill(Type t) {
    switch (t) {
        case Type::Short: return -32767.0;
        case Type::Int: return -2147483647.0;
        case Type::Float: return static_cast<double>(9.9692099683868690e+36f);
        case Type::Double: return 9.9692099683868690e+36;
        case Type::UShort: return 65535.0;
        case Type::UInt: return 4294967295.0;
        case Type::Int64: return -9223372036854775806.0;
        case Type::UInt64: return 18446744073709551614.0;
        default: return std::nullopt;  // no default fill check for byte types
    }
}

double first_number(const Attribute& a, double fallback) { return a.numbers.empty() ? fallback : a.numbers.front(); }

}  // namespace

MaskedArray read_masked(const File& file, std::string_view name) {
    const auto& v = file.variable(name);
    MaskedArray out;
    out.shape = file.shape(v);
    auto raw = file.read_raw(v);

    std::optional<double> fill = default_fill(v.type);
    if (auto* a = v.attribute("_FillValue"); a && !a->numbers.empty()) fill = a->numbers.front();
    std::vector<double> missing;
    if (auto* a = v.attribute("missing_value")) missing = a->numbers;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (auto* a = v.attribute("valid_range"); a && a->numbers.size() == 2) {
        lo = a->numbers[0];
        hi = a->numbers[1];
    }
    if (auto* a = v.attribute("valid_min")) lo = first_number(*a, lo);
    if (auto* a = v.attribute("valid_max")) hi = first_number(*a, hi);
    double scale = 1.0, offset = 0.0;
    if (auto* a = v.attribute("scale_factor")) scale = first_number(*a, 1.0);
    if (auto* a = v.attribute("add_offset")) offset = first_number(*a, 0.0);

    out.values.resize(raw.size());
    out.valid.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double r = raw[i];
        bool ok = std::isfinite(r) && !(fill && r == *fill) && r >= lo && r <= hi;
        for (double m : missing) ok = ok && r != m;
        out.valid[i] = ok ? 1 : 0;
        out.values[i] = ok ? r * scale + offset : std::nan("");
    }
    return out;
}

Writer& Writer::add_dimension(std::string name, std::uint64_t length, bool unlimited) {
    dims_.push_back({std::move(name), unlimited ? 0 : length, unlimited});
    return *this;
}

Writer& Writer::add_global_attribute(Attribute attr) {
    gatts_.push_back(std::move(attr));
    return *this;
}

Writer& Writer::add_variable(VariableSpec spec) {
    vars_.push_back(std::move(spec));
    return *this;
}

std::string Writer::serialize() const {
    auto dim_index = [this](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < dims_.size(); ++i)
            if (dims_[i].name == name) return i;
        throw Error(ErrorCode::InvalidValue, "netcdf writer: unknown dimension " + name);
    };

    struct Layout {
        std::vector<std::size_t> dim_ids;
        bool is_record = false;
        std::uint64_t per_record_elems = 1;
        std::uint64_t total_elems = 0;
        std::uint64_t vsize = 0;
        std::uint64_t begin = 0;
    };
    std::vector<Layout> layout(vars_.size());
    std::optional<std::uint64_t> numrecs;
    std::size_t record_vars = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        const auto& spec = vars_[i];
        auto& l = layout[i];
        for (std::size_t k = 0; k < spec.dims.size(); ++k) {
            const auto id = dim_index(spec.dims[k]);
            l.dim_ids.push_back(id);
            if (dims_[id].unlimited) {
                if (k != 0) throw Error(ErrorCode::InvalidValue, "netcdf writer: record dimension must lead");
                l.is_record = true;
            } else {
                l.per_record_elems *= dims_[id].length;
            }
        }
        const auto count = spec.type == Type::Char ? spec.text.size() : spec.data.size();
        if (l.is_record) {
            ++record_vars;
            const auto recs = l.per_record_elems == 0 ? 0 : count / l.per_record_elems;
            if (recs * l.per_record_elems != count || (numrecs && *numrecs != recs))
                throw Error(ErrorCode::InvalidValue, "netcdf writer: inconsistent record data for " + spec.name);
            numrecs = recs;
            l.total_elems = count;
            l.vsize = pad4(l.per_record_elems * type_size(spec.type));
        } else {
            if (count != l.per_record_elems)
                throw Error(ErrorCode::InvalidValue,
                            fmt::format("netcdf writer: {} holds {} values, shape needs {}", spec.name, count,
                                        l.per_record_elems));
            l.total_elems = count;
            l.vsize = pad4(count * type_size(spec.type));
        }
    }

    const bool wide_counts = version_ == Version::Data64;
    const bool wide_offsets = version_ != Version::Classic;

    auto put32 = [](std::string& s, std::uint64_t v) {
        for (int i = 3; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put64 = [](std::string& s, std::uint64_t v) {
        for (int i = 7; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put_count = [&](std::string& s, std::uint64_t v) { wide_counts ? put64(s, v) : put32(s, v); };
    auto put_offset = [&](std::string& s, std::uint64_t v) { wide_offsets ? put64(s, v) : put32(s, v); };
    auto put_name = [&](std::string& s, const std::string& name) {
        put_count(s, name.size());
        s += name;
        s.append(pad4(name.size()) - name.size(), '\0');
    };
    auto put_attrs = [&](std::string& s, const std::vector<Attribute>& attrs) {
        if (attrs.empty()) {
            put32(s, 0);
            put_count(s, 0);
            return;
        }
        put32(s, kTagAttribute);
        put_count(s, attrs.size());
        for (const auto& a : attrs) {
            put_name(s, a.name);
            put32(s, static_cast<std::uint32_t>(a.type));
            if (a.type == Type::Char) {
                put_count(s, a.text.size());
                s += a.text;
                s.append(pad4(a.text.size()) - a.text.size(), '\0');
            } else {
                put_count(s, a.numbers.size());
                const auto start = s.size();
                for (double x : a.numbers) encode_element(s, x, a.type);
                s.append(pad4(s.size() - start) - (s.size() - start), '\0');
            }
        }
    };

    auto build_header = [&]() {
        std::string h = "CDF";
        h.push_back(static_cast<char>(version_));
        put_count(h, numrecs.value_or(0));
        if (dims_.empty()) {
            put32(h, 0);
            put_count(h, 0);
        } else {
            put32(h, kTagDimension);
            put_count(h, dims_.size());
            for (const auto& d : dims_) {
                put_name(h, d.name);
                put_count(h, d.unlimited ? 0 : d.length);
            }
        }
        put_attrs(h, gatts_);
        if (vars_.empty()) {
            put32(h, 0);
            put_count(h, 0);
        } else {
            put32(h, kTagVariable);
            put_count(h, vars_.size());
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                put_name(h, vars_[i].name);
                put_count(h, layout[i].dim_ids.size());
                for (auto id : layout[i].dim_ids) put_count(h, id);
                put_attrs(h, vars_[i].attributes);
                put32(h, static_cast<std::uint32_t>(vars_[i].type));
                put_count(h, layout[i].vsize);
                put_offset(h, layout[i].begin);
            }
        }
        return h;
    };

    const auto header_size = build_header().size();
    std::uint64_t cursor = header_size;
    for (auto& l : layout) {
        if (l.is_record) continue;
        l.begin = cursor;
        cursor += l.vsize;
    }
    std::uint64_t recsize = 0;
    for (auto& l : layout) {
        if (!l.is_record) continue;
        l.begin = cursor + recsize;
        recsize += l.vsize;
    }
    if (record_vars == 1)
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (layout[i].is_record) recsize = layout[i].per_record_elems * type_size(vars_[i].type);

    std::string out = build_header();
    auto write_values = [&](const VariableSpec& spec, std::uint64_t from, std::uint64_t n) {
        for (std::uint64_t k = from; k < from + n; ++k) {
            if (spec.type == Type::Char)
                out.push_back(spec.text[k]);
            else
                encode_element(out, spec.data[k], spec.type);
        }
    };
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (layout[i].is_record) continue;
        const auto start = out.size();
        write_values(vars_[i], 0, layout[i].total_elems);
        out.append(layout[i].vsize - (out.size() - start), '\0');
    }
    for (std::uint64_t r = 0; r < numrecs.value_or(0); ++r) {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (!layout[i].is_record) continue;
            const auto start = out.size();
            write_values(vars_[i], r * layout[i].per_record_elems, layout[i].per_record_elems);
            if (record_vars > 1) out.append(layout[i].vsize - (out.size() - start), '\0');
        }
    }
    return out;
}

}  // namespace oceanqa::netcdf
