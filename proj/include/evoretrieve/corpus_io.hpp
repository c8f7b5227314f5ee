#pragma once

/// @file corpus_io.hpp
/// @brief Corpus ingestion, the binary index format and the synthetic embedder.
///
/// Binary index layout (all integers little-endian):
///
///     "EVS1"                      4 bytes magic
///     dim                         u32
///     count                       u64
///     count x {
///         id_len   u32, id bytes (UTF-8)
///         text_len u32, text bytes (UTF-8)
///         dim x f32 (IEEE-754, little-endian)
///     }
///
/// A corpus built by the synthetic embedder gets a sidecar
/// `<index>.recipe.json` recording dim and seed, so query text can later be
/// embedded the same way.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "core.hpp"
#include "random.hpp"

namespace evoretrieve {

// ---------------------------------------------------------------------------
// Synthetic embedder
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// ASCII-lowercased tokens split on ASCII whitespace. Non-ASCII bytes pass
/// through unchanged.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

/// Coordinate i of the pseudo-Gaussian vector keyed by `key`: an
/// Irwin-Hall sum of four counter-indexed uniforms, scaled to unit variance.
inline double token_coordinate(std::uint64_t key, std::size_t i) noexcept {
    double sum = 0.0;
    for (std::uint64_t k = 0; k < 4; ++k) {
        sum += static_cast<double>(splitmix64(key + 4 * static_cast<std::uint64_t>(i) + k) >> 11) * 0x1.0p-53;
    }
    return (sum - 2.0) * 1.7320508075688772;
}

/// Bag-of-words random projection: each distinct token contributes its
/// keyed pseudo-Gaussian vector weighted by term frequency; the sum is
/// L2-normalized. Empty or all-whitespace text gives the zero vector.
inline EmbeddingVector synth_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw Error(ErrorKind::invalid_argument, "dim must be positive");
    std::map<std::string, std::size_t> counts; // sorted, so token order cannot change the sum
    for (auto& t : tokenize(text)) ++counts[std::move(t)];
    if (counts.empty()) return EmbeddingVector::zeros(dim);

    std::vector<double> acc(dim, 0.0);
    for (const auto& [token, tf] : counts) {
        const std::uint64_t key = fnv1a64(token) ^ seed;
        for (std::size_t i = 0; i < dim; ++i) acc[i] += static_cast<double>(tf) * token_coordinate(key, i);
    }
    double norm2 = 0.0;
    for (double v : acc) norm2 += v * v;
    const double norm = std::sqrt(norm2);
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0f;
    return EmbeddingVector(std::move(out));
}

struct SynthRecipe {
    std::size_t dim = 512;
    std::uint64_t seed = 0;

    friend bool operator==(const SynthRecipe&, const SynthRecipe&) = default;
};

inline constexpr const char* kSynthEmbedderName = "synth-bow-fnv1a/1";

inline std::filesystem::path recipe_path(const std::filesystem::path& index_path) {
    return std::filesystem::path(index_path.string() + ".recipe.json");
}

inline void save_recipe(const SynthRecipe& recipe, const std::filesystem::path& index_path) {
    nlohmann::ordered_json j;
    j["embedder"] = kSynthEmbedderName;
    j["dim"] = recipe.dim;
    j["seed"] = recipe.seed;
    std::ofstream out(recipe_path(index_path), std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + recipe_path(index_path).string());
    out << j.dump(2) << '\n';
}

/// Empty when the index was not built with the synthetic embedder.
inline std::optional<SynthRecipe> load_recipe(const std::filesystem::path& index_path) {
    const auto path = recipe_path(index_path);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("embedder").get<std::string>() != kSynthEmbedderName) {
            throw Error(ErrorKind::parse, path.string() + ": unknown embedder");
        }
        return SynthRecipe{j.at("dim").get<std::size_t>(), j.at("seed").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// JSONL
// ---------------------------------------------------------------------------

/// Parses one corpus document per non-blank line: {"id", "text"?, "embedding"}.
/// With a recipe, `embedding` is ignored and computed from `text` instead.
/// The first document fixes the dimension.
inline Corpus parse_corpus_jsonl(std::istream& in, const std::optional<SynthRecipe>& synth = std::nullopt) {
    Corpus corpus;
    if (synth) corpus.dim = synth->dim;
    std::map<std::string, std::size_t> line_of_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;

        Document doc;
        std::vector<float> values;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.is_object()) throw Error(ErrorKind::parse, "expected a JSON object", line_no);
            if (!j.contains("id") || !j["id"].is_string()) {
                throw Error(ErrorKind::parse, "missing string field 'id'", line_no);
            }
            doc.id = j["id"].get<std::string>();
            if (j.contains("text")) {
                if (!j["text"].is_string()) throw Error(ErrorKind::parse, "'text' must be a string", line_no);
                doc.text = j["text"].get<std::string>();
            }
            if (!synth) {
                if (!j.contains("embedding") || !j["embedding"].is_array()) {
                    throw Error(ErrorKind::parse, "missing array field 'embedding'", line_no);
                }
                for (const auto& x : j["embedding"]) {
                    if (!x.is_number()) throw Error(ErrorKind::parse, "embedding holds a non-number", line_no);
                    values.push_back(static_cast<float>(x.get<double>()));
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, e.what(), line_no);
        }

        if (synth) {
            doc.embedding = synth_embed(doc.text, synth->dim, synth->seed);
        } else {
            if (values.empty()) throw Error(ErrorKind::dimension_mismatch, "embedding is empty", line_no);
            if (corpus.docs.empty()) corpus.dim = values.size();
            if (values.size() != corpus.dim) {
                throw Error(ErrorKind::dimension_mismatch,
                            "document '" + doc.id + "' has " + std::to_string(values.size()) +
                                " coordinates, expected " + std::to_string(corpus.dim),
                            line_no);
            }
            try {
                doc.embedding = EmbeddingVector(std::move(values));
            } catch (const Error& e) {
                throw Error(ErrorKind::parse, e.what(), line_no);
            }
        }

        if (auto [it, fresh] = line_of_id.emplace(doc.id, line_no); !fresh) {
            throw Error(ErrorKind::duplicate_id,
                        "id '" + doc.id + "' already used on line " + std::to_string(it->second), line_no);
        }
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

inline Corpus load_corpus_jsonl(const std::filesystem::path& path,
                                const std::optional<SynthRecipe>& synth = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    return parse_corpus_jsonl(in, synth);
}

// ---------------------------------------------------------------------------
// Binary index
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kIndexMagic{'E', 'V', 'S', '1'};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

class Reader {
  public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le(const char* what) {
        need(sizeof(T), what);
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }

    std::string_view take(std::size_t n, const char* what) {
        need(n, what);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw Error(ErrorKind::corrupt_index, std::string("truncated while reading ") + what);
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string encode_binary(const Corpus& corpus) {
    require_valid(corpus);
    if (corpus.dim == 0) throw Error(ErrorKind::invalid_argument, "cannot index a corpus with dim 0");
    if (corpus.dim > UINT32_MAX) throw Error(ErrorKind::invalid_argument, "dim does not fit in 32 bits");
    std::string out(kIndexMagic.begin(), kIndexMagic.end());
    detail::put_le(out, static_cast<std::uint32_t>(corpus.dim));
    detail::put_le(out, static_cast<std::uint64_t>(corpus.size()));
    for (const auto& doc : corpus.docs) {
        for (const std::string* s : {&doc.id, &doc.text}) {
            if (s->size() > UINT32_MAX) throw Error(ErrorKind::invalid_argument, "string too long for index");
            detail::put_le(out, static_cast<std::uint32_t>(s->size()));
            out += *s;
        }
        for (float v : doc.embedding.values()) detail::put_le(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

inline Corpus decode_binary(std::string_view bytes) {
    detail::Reader r(bytes);
    const auto magic = r.take(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kIndexMagic.begin())) {
        throw Error(ErrorKind::corrupt_index, "bad magic '" + std::string(magic) + "'");
    }
    Corpus corpus;
    corpus.dim = r.get_le<std::uint32_t>("dim");
    if (corpus.dim == 0) throw Error(ErrorKind::corrupt_index, "dim is 0");
    const auto count = r.get_le<std::uint64_t>("count");
    // Each record needs at least 8 + 4*dim bytes; refuse counts the file cannot hold.
    const std::uint64_t min_record = 8 + 4 * static_cast<std::uint64_t>(corpus.dim);
    if (count > r.remaining() / min_record) {
        throw Error(ErrorKind::corrupt_index, "count " + std::to_string(count) + " exceeds file size");
    }
    corpus.docs.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t d = 0; d < count; ++d) {
        Document doc;
        doc.id = std::string(r.take(r.get_le<std::uint32_t>("id length"), "id"));
        doc.text = std::string(r.take(r.get_le<std::uint32_t>("text length"), "text"));
        std::vector<float> values(corpus.dim);
        for (auto& v : values) v = std::bit_cast<float>(r.get_le<std::uint32_t>("embedding"));
        try {
            doc.embedding = EmbeddingVector(std::move(values));
        } catch (const Error& e) {
            throw Error(ErrorKind::corrupt_index, "document '" + doc.id + "': " + e.what());
        }
        corpus.docs.push_back(std::move(doc));
    }
    if (r.remaining() != 0) throw Error(ErrorKind::corrupt_index, "trailing bytes after last document");
    try {
        require_valid(corpus);
    } catch (const Error& e) {
        throw Error(ErrorKind::corrupt_index, e.what());
    }
    return corpus;
}

inline void save_binary(const Corpus& corpus, const std::filesystem::path& path) {
    const auto bytes = encode_binary(corpus);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

inline Corpus load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_binary(bytes);
}

} // namespace evoretrieve
