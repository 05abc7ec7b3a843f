#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camforge/linalg.hpp"

namespace camforge::io {

// Named-tensor container: 8-byte magic, little-endian u64 header length, a
// JSON header mapping tensor name -> {shape, dtype, byte_offset, byte_len},
// then the contiguous float32 payload in name-sorted order, row-major.
// Equal contents serialize to equal bytes.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    std::int64_t numel() const;
};

struct TensorStore {
    nlohmann::json meta = nlohmann::json::object();
    std::map<std::string, Tensor> tensors;

    bool has(const std::string& name) const { return tensors.count(name) != 0; }

    void set_matrix(const std::string& name, const Mat& m);
    void set_vector(const std::string& name, const Vec& v);
    void set_scalar(const std::string& name, double v);

    Mat matrix(const std::string& name) const;
    Vec vector(const std::string& name) const;
    double scalar(const std::string& name) const;

    std::vector<std::uint8_t> serialize() const;
    static TensorStore deserialize(const std::vector<std::uint8_t>& bytes);

    void save(const std::string& path) const;
    static TensorStore load(const std::string& path);
};

}  // namespace camforge::io
