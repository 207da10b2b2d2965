#include "chaotherm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "chaotherm/error.hpp"

namespace chaotherm {

std::string format_double(double v) {
    std::array<char, 40> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
    require(row.size() == header.size(), ErrorKind::shape, "csv row width does not match header");
    rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorKind::config, "cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) fail(ErrorKind::config, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail(ErrorKind::config, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

namespace {

using namespace boost::archive::iterators;
using to_b64 = base64_from_binary<transform_width<const char*, 6, 8>>;
using from_b64 = transform_width<binary_from_base64<const char*>, 8, 6>;

std::string bytes_of(const std::vector<double>& values) {
    std::string raw(values.size() * 8, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto u = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) raw[i * 8 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
    return raw;
}

}  // namespace

std::string encode_doubles(const std::vector<double>& values) {
    const std::string raw = bytes_of(values);
    std::string out(to_b64(raw.data()), to_b64(raw.data() + raw.size()));
    out.append((3 - raw.size() % 3) % 3, '=');
    return out;
}

std::vector<double> decode_doubles(const std::string& text) {
    std::string body = text;
    std::size_t pad = 0;
    while (!body.empty() && body.back() == '=') {
        body.pop_back();
        ++pad;
    }
    require(pad <= 2, ErrorKind::parameter, "malformed base64 padding");
    std::string raw;
    try {
        raw.assign(from_b64(body.data()), from_b64(body.data() + body.size()));
    } catch (const std::exception&) {
        fail(ErrorKind::parameter, "malformed base64 text");
    }
    require(raw.size() % 8 == 0, ErrorKind::shape, "base64 payload is not a whole number of doubles");
    std::vector<double> out(raw.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= std::uint64_t(static_cast<unsigned char>(raw[i * 8 + b])) << (8 * b);
        out[i] = std::bit_cast<double>(u);
    }
    return out;
}

}  // namespace chaotherm
