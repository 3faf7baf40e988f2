/**
 * Node feature storage.
 *
 * Features are float32 vectors keyed by image id. The on-disk binary format
 * is bit-exact and row-addressable: magic "CPFS", u32 version, u32 count,
 * u32 dim, then per record [u16 id length, id bytes, dim float32 LE].
 * A JSON alternative ({"dim": D, "features": {"id": [..]}}) exists for
 * hand-written fixtures. Stores are immutable once built.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace collage {

class FeatureStore {
public:
    FeatureStore() = default;
    explicit FeatureStore(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    size_t size() const { return entries_.size(); }
    bool contains(const std::string& id) const { return entries_.count(id) != 0; }

    /// Throws LookupError when the id is absent.
    const std::vector<float>& at(const std::string& id) const;

    /// Throws ShapeError on dim mismatch, NumericError on non-finite values.
    void insert(const std::string& id, std::vector<float> feature);

    const std::map<std::string, std::vector<float>>& entries() const { return entries_; }

    bool operator==(const FeatureStore&) const = default;

private:
    int dim_ = 0;
    std::map<std::string, std::vector<float>> entries_;
};

void save_feature_store(const FeatureStore& store, const std::string& path);
void save_feature_store_json(const FeatureStore& store, const std::string& path);

/// Reads either format, dispatching on the leading magic bytes.
FeatureStore load_feature_store(const std::string& path);

/// Synthetic stand-in for extracted image features: unit-norm class centroid
/// (seeded per class) plus Gaussian noise of scale noise_sigma per image.
FeatureStore synth_features(const std::vector<std::pair<std::string, int>>& images, int dim,
                            double noise_sigma, uint64_t seed);

}  // namespace collage
