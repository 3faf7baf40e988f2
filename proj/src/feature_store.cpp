#include "collage/feature_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "collage/errors.hpp"
#include "collage/rng.hpp"

namespace collage {

namespace {

constexpr char kMagic[4] = {'C', 'P', 'F', 'S'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

uint32_t read_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(std::string("feature store truncated while reading ") + what);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint16_t read_u16(std::istream& in, const char* what) {
    unsigned char b[2];
    if (!in.read(reinterpret_cast<char*>(b), 2))
        throw FormatError(std::string("feature store truncated while reading ") + what);
    return static_cast<uint16_t>(b[0] | b[1] << 8);
}

void check_finite(const std::string& id, const std::vector<float>& feature) {
    for (float v : feature)
        if (!std::isfinite(v))
            throw NumericError("feature vector for '" + id + "' contains a non-finite value");
}

FeatureStore load_json_store(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("feature store JSON parse failure: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("dim") || !doc.contains("features"))
        throw FormatError("feature store JSON must contain 'dim' and 'features'");
    FeatureStore store(doc.at("dim").get<int>());
    for (const auto& [id, vec] : doc.at("features").items()) {
        std::vector<float> feature = vec.get<std::vector<float>>();
        store.insert(id, std::move(feature));
    }
    return store;
}

}  // namespace

const std::vector<float>& FeatureStore::at(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw LookupError("feature store has no entry for id '" + id + "'");
    return it->second;
}

void FeatureStore::insert(const std::string& id, std::vector<float> feature) {
    if (static_cast<int>(feature.size()) != dim_)
        throw ShapeError("feature for '" + id + "' has dim " + std::to_string(feature.size()) +
                         ", store dim is " + std::to_string(dim_));
    check_finite(id, feature);
    entries_[id] = std::move(feature);
}

void save_feature_store(const FeatureStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<uint32_t>(store.size()));
    write_u32(out, static_cast<uint32_t>(store.dim()));
    for (const auto& [id, feature] : store.entries()) {
        if (id.size() > 0xFFFF) throw FormatError("image id longer than 65535 bytes: " + id);
        write_u16(out, static_cast<uint16_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        // float32 little-endian; memcpy is exact on this platform.
        for (float v : feature) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            write_u32(out, bits);
        }
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

void save_feature_store_json(const FeatureStore& store, const std::string& path) {
    nlohmann::json features = nlohmann::json::object();
    for (const auto& [id, feature] : store.entries()) features[id] = feature;
    nlohmann::json doc{{"dim", store.dim()}, {"features", features}};
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << doc.dump(1) << '\n';
}

FeatureStore load_feature_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    char magic[4] = {};
    if (!in.read(magic, 4)) throw FormatError("feature store '" + path + "' shorter than magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        // Not the binary format; retry the whole stream as JSON.
        in.seekg(0);
        return load_json_store(in);
    }
    uint32_t version = read_u32(in, "version");
    if (version != kVersion)
        throw FormatError("feature store version " + std::to_string(version) + " unsupported");
    uint32_t count = read_u32(in, "count");
    uint32_t dim = read_u32(in, "dim");
    FeatureStore store(static_cast<int>(dim));
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t id_len = read_u16(in, "id length");
        std::string id(id_len, '\0');
        if (!in.read(id.data(), id_len)) throw FormatError("feature store truncated inside an id");
        std::vector<float> feature(dim);
        for (uint32_t d = 0; d < dim; ++d) {
            uint32_t bits = read_u32(in, "feature value");
            float v;
            std::memcpy(&v, &bits, 4);
            feature[d] = v;
        }
        store.insert(id, std::move(feature));
    }
    return store;
}

FeatureStore synth_features(const std::vector<std::pair<std::string, int>>& images, int dim,
                            double noise_sigma, uint64_t seed) {
    if (dim < 2) throw ConfigError("synthetic feature dim must be >= 2, got " + std::to_string(dim));
    FeatureStore store(dim);
    SeededRng root(seed);
    std::map<int, std::vector<double>> centroids;
    for (const auto& [id, class_id] : images) {
        auto it = centroids.find(class_id);
        if (it == centroids.end()) {
            SeededRng crng = root.derive("class:" + std::to_string(class_id));
            std::vector<double> centroid(static_cast<size_t>(dim));
            double norm_sq = 0.0;
            for (double& v : centroid) {
                v = crng.gaussian();
                norm_sq += v * v;
            }
            double inv_norm = 1.0 / std::sqrt(norm_sq);
            for (double& v : centroid) v *= inv_norm;
            it = centroids.emplace(class_id, std::move(centroid)).first;
        }
        SeededRng irng = root.derive("img:" + id);
        std::vector<float> feature(static_cast<size_t>(dim));
        for (int d = 0; d < dim; ++d)
            feature[static_cast<size_t>(d)] =
                static_cast<float>(it->second[static_cast<size_t>(d)] +
                                   (noise_sigma > 0.0 ? irng.gaussian(0.0, noise_sigma) : 0.0));
        store.insert(id, std::move(feature));
    }
    return store;
}

}  // namespace collage
