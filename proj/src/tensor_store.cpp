#include "camforge/tensor_store.hpp"

#include <cstring>
#include <fstream>

#include "camforge/errors.hpp"

namespace camforge::io {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'T', 'E', 'N', 'S', '0', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::int64_t Tensor::numel() const {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    return n;
}

void TensorStore::set_matrix(const std::string& name, const Mat& m) {
    Tensor t;
    t.shape = {m.rows(), m.cols()};
    t.data.resize(static_cast<std::size_t>(m.size()));
    for (std::int64_t i = 0; i < m.size(); ++i) {
        t.data[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);  // row-major
    }
    tensors[name] = std::move(t);
}

void TensorStore::set_vector(const std::string& name, const Vec& v) {
    Tensor t;
    t.shape = {v.size()};
    t.data.resize(static_cast<std::size_t>(v.size()));
    for (std::int64_t i = 0; i < v.size(); ++i) {
        t.data[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
    }
    tensors[name] = std::move(t);
}

void TensorStore::set_scalar(const std::string& name, double v) {
    Tensor t;
    t.shape = {1};
    t.data = {static_cast<float>(v)};
    tensors[name] = std::move(t);
}

Mat TensorStore::matrix(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("missing tensor: " + name);
    const Tensor& t = it->second;
    if (t.shape.size() != 2) throw IoError("tensor is not a matrix: " + name);
    Mat m(t.shape[0], t.shape[1]);
    for (std::int64_t i = 0; i < m.size(); ++i) {
        m.data()[i] = static_cast<double>(t.data[static_cast<std::size_t>(i)]);
    }
    return m;
}

Vec TensorStore::vector(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("missing tensor: " + name);
    const Tensor& t = it->second;
    if (t.shape.size() != 1) throw IoError("tensor is not a vector: " + name);
    Vec v(t.shape[0]);
    for (std::int64_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<double>(t.data[static_cast<std::size_t>(i)]);
    }
    return v;
}

double TensorStore::scalar(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("missing tensor: " + name);
    if (it->second.data.size() != 1) throw IoError("tensor is not a scalar: " + name);
    return static_cast<double>(it->second.data[0]);
}

std::vector<std::uint8_t> TensorStore::serialize() const {
    nlohmann::json header;
    header["meta"] = meta;
    nlohmann::json names = nlohmann::json::object();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {  // std::map iterates in sorted order
        const std::uint64_t len = static_cast<std::uint64_t>(t.numel()) * sizeof(float);
        nlohmann::json tj;
        tj["shape"] = t.shape;
        tj["dtype"] = "f32";
        tj["byte_offset"] = offset;
        tj["byte_len"] = len;
        names[name] = tj;
        offset += len;
    }
    header["tensors"] = names;
    const std::string header_str = header.dump();

    std::vector<std::uint8_t> out;
    out.reserve(16 + header_str.size() + offset);
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u64(out, header_str.size());
    out.insert(out.end(), header_str.begin(), header_str.end());
    for (const auto& [name, t] : tensors) {
        const std::size_t pos = out.size();
        out.resize(pos + t.data.size() * sizeof(float));
        std::memcpy(out.data() + pos, t.data.data(), t.data.size() * sizeof(float));
    }
    return out;
}

TensorStore TensorStore::deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw IoError("not a tensor container (bad magic)");
    }
    const std::uint64_t header_len = get_u64(bytes.data() + 8);
    if (16 + header_len > bytes.size()) throw IoError("truncated tensor container header");
    const nlohmann::json header = nlohmann::json::parse(
        bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));

    TensorStore store;
    store.meta = header.value("meta", nlohmann::json::object());
    const std::size_t payload_base = 16 + header_len;
    for (const auto& [name, tj] : header.at("tensors").items()) {
        Tensor t;
        t.shape = tj.at("shape").get<std::vector<std::int64_t>>();
        if (tj.at("dtype").get<std::string>() != "f32") {
            throw IoError("unsupported dtype for tensor " + name);
        }
        const std::uint64_t off = tj.at("byte_offset").get<std::uint64_t>();
        const std::uint64_t len = tj.at("byte_len").get<std::uint64_t>();
        if (payload_base + off + len > bytes.size()) {
            throw IoError("truncated tensor payload for " + name);
        }
        if (len != static_cast<std::uint64_t>(t.numel()) * sizeof(float)) {
            throw IoError("tensor byte length does not match shape: " + name);
        }
        t.data.resize(static_cast<std::size_t>(t.numel()));
        std::memcpy(t.data.data(), bytes.data() + payload_base + off, len);
        store.tensors[name] = std::move(t);
    }
    return store;
}

void TensorStore::save(const std::string& path) const {
    const auto bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

TensorStore TensorStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace camforge::io
