#include <wikisem/formats.hpp>

#include <charconv>
#include <fstream>

namespace wikisem {

namespace {

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

template <typename Scalar>
bool parse_scalar(std::string_view s, Scalar& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

template <typename Scalar>
bool BasicEmbedding<Scalar>::add(std::string token, std::span<const Scalar> values) {
    if (values.size() != dimension_) {
        throw std::invalid_argument("vector has " + std::to_string(values.size()) +
                                    " components, expected " + std::to_string(dimension_));
    }
    auto [it, inserted] = index_.try_emplace(token, static_cast<std::uint32_t>(tokens_.size()));
    if (!inserted) {
        ++duplicates_;
        return false;
    }
    tokens_.push_back(std::move(token));
    data_.insert(data_.end(), values.begin(), values.end());
    return true;
}

template <typename Scalar>
BasicEmbedding<Scalar> load_embedding(std::istream& in, HeaderMode mode) {
    BasicEmbedding<Scalar> e;
    std::string buffer;
    std::vector<std::string_view> fields;
    std::vector<Scalar> values;
    std::size_t line_number = 0;
    bool first = true;
    bool have_dimension = false;

    while (std::getline(in, buffer)) {
        ++line_number;
        std::string_view line = buffer;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        split_fields(line, fields);
        if (fields.empty()) {
            continue;
        }
        if (first) {
            first = false;
            const bool looks_like_header =
                fields.size() == 2 && parse_count(fields[0]) && parse_count(fields[1]);
            if (mode == HeaderMode::Present && !looks_like_header) {
                throw FormatError("expected a 'vocab_size dimension' header", line_number);
            }
            if (mode != HeaderMode::Absent && looks_like_header) {
                auto d = *parse_count(fields[1]);
                if (d == 0) {
                    throw FormatError("header declares dimension 0", line_number);
                }
                e.set_dimension(d);
                have_dimension = true;
                continue;
            }
        }
        if (!have_dimension) {
            if (fields.size() < 2) {
                throw FormatError("vector line without components", line_number);
            }
            e.set_dimension(fields.size() - 1);
            have_dimension = true;
        }
        if (fields.size() != e.dimension() + 1) {
            throw FormatError("expected " + std::to_string(e.dimension()) +
                                  " components, found " + std::to_string(fields.size() - 1),
                              line_number);
        }
        values.resize(e.dimension());
        for (std::size_t k = 0; k < e.dimension(); ++k) {
            if (!parse_scalar(fields[k + 1], values[k])) {
                throw FormatError("component " + std::to_string(k + 1) + " is not a number: '" +
                                      std::string(fields[k + 1]) + "'",
                                  line_number);
            }
        }
        e.add(std::string(fields[0]), values);
    }
    if (e.size() == 0) {
        throw FormatError("embedding contains no vectors");
    }
    return e;
}

template class BasicEmbedding<float>;
template class BasicEmbedding<double>;
template BasicEmbedding<float> load_embedding<float>(std::istream&, HeaderMode);
template BasicEmbedding<double> load_embedding<double>(std::istream&, HeaderMode);

Embedding load_embedding_file(const std::filesystem::path& path, HeaderMode mode) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open embedding file " + path.string());
    }
    try {
        return load_embedding<float>(in, mode);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.detail(), e.line(), e.offset());
    }
}

} // namespace wikisem
