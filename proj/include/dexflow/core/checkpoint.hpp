#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dexflow/core/common.hpp"
#include "dexflow/core/params.hpp"

namespace dexflow {

static_assert(std::endian::native == std::endian::little,
              "checkpoint values are raw little-endian");

// Named-tensor container. On disk: a text header mapping each name to
// (dtype, shape, byte offset into the data section) followed by the raw
// little-endian values. Round-trips are bit-exact.
//
//   dexckpt 1
//   meta <key> <value...>
//   tensor <name> <f32|f64> <rows> <cols> <offset>
//   data <total_bytes>
//   <raw bytes>
struct TensorFile {
    struct Entry {
        std::string name;
        std::string dtype;  // "f32" | "f64"
        int r = 0, c = 0;
        std::vector<unsigned char> bytes;
    };

    std::vector<Entry> tensors;
    std::map<std::string, std::string> meta;

    template <typename T>
    void add(const std::string& name, int r, int c, const std::vector<T>& values) {
        Entry e;
        e.name = name;
        e.dtype = sizeof(T) == 4 ? "f32" : "f64";
        e.r = r;
        e.c = c;
        e.bytes.resize(values.size() * sizeof(T));
        std::memcpy(e.bytes.data(), values.data(), e.bytes.size());
        tensors.push_back(std::move(e));
    }

    template <typename T>
    std::vector<T> values(const Entry& e) const {
        const char* want = sizeof(T) == 4 ? "f32" : "f64";
        if (e.dtype != want)
            throw ContractViolation("tensor " + e.name + " has dtype " + e.dtype + ", expected " + want);
        std::vector<T> out(e.bytes.size() / sizeof(T));
        std::memcpy(out.data(), e.bytes.data(), e.bytes.size());
        return out;
    }

    const Entry* find(const std::string& name) const {
        for (const auto& e : tensors)
            if (e.name == name) return &e;
        return nullptr;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ContractViolation("cannot write checkpoint: " + path);
        std::ostringstream header;
        header << "dexckpt 1\n";
        for (const auto& [k, v] : meta) header << "meta " << k << " " << v << "\n";
        size_t offset = 0;
        for (const auto& e : tensors) {
            header << "tensor " << e.name << " " << e.dtype << " " << e.r << " " << e.c << " " << offset
                   << "\n";
            offset += e.bytes.size();
        }
        header << "data " << offset << "\n";
        f << header.str();
        for (const auto& e : tensors)
            f.write(reinterpret_cast<const char*>(e.bytes.data()),
                    static_cast<std::streamsize>(e.bytes.size()));
        if (!f) throw ContractViolation("checkpoint write failed: " + path);
    }

    static TensorFile load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw ContractViolation("cannot read checkpoint: " + path);
        std::string line;
        if (!std::getline(f, line) || line != "dexckpt 1")
            throw ContractViolation("bad checkpoint magic in " + path);
        TensorFile tf;
        struct Pending {
            std::string name, dtype;
            int r, c;
            size_t offset;
        };
        std::vector<Pending> pend;
        size_t total = 0;
        while (std::getline(f, line)) {
            std::istringstream is(line);
            std::string tag;
            is >> tag;
            if (tag == "meta") {
                std::string key;
                is >> key;
                std::string rest;
                std::getline(is, rest);
                if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
                tf.meta[key] = rest;
            } else if (tag == "tensor") {
                Pending p;
                is >> p.name >> p.dtype >> p.r >> p.c >> p.offset;
                if (!is) throw ContractViolation("malformed tensor record in " + path);
                pend.push_back(p);
            } else if (tag == "data") {
                is >> total;
                break;
            } else {
                throw ContractViolation("unknown checkpoint record '" + tag + "' in " + path);
            }
        }
        std::vector<unsigned char> blob(total);
        if (total > 0) {
            f.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(total));
            if (static_cast<size_t>(f.gcount()) != total)
                throw ContractViolation("truncated checkpoint data in " + path);
        }
        for (size_t i = 0; i < pend.size(); ++i) {
            const size_t end = i + 1 < pend.size() ? pend[i + 1].offset : total;
            Entry e;
            e.name = pend[i].name;
            e.dtype = pend[i].dtype;
            e.r = pend[i].r;
            e.c = pend[i].c;
            e.bytes.assign(blob.begin() + static_cast<long>(pend[i].offset),
                           blob.begin() + static_cast<long>(end));
            const size_t elems = static_cast<size_t>(e.r) * e.c;
            if (e.bytes.size() != elems * (e.dtype == "f32" ? 4 : 8))
                throw ContractViolation("tensor byte count mismatch for " + e.name);
            tf.tensors.push_back(std::move(e));
        }
        return tf;
    }
};

// Store <-> file. Moment buffers ride along as <name>.m / <name>.v so a
// resumed run continues bit-for-bit.
template <typename T>
TensorFile store_to_file(const ParamStore<T>& store, bool with_opt_state) {
    TensorFile tf;
    for (const auto& p : store.all()) {
        tf.add(p.name, p.r, p.c, p.value);
        if (with_opt_state && p.trainable) {
            tf.add(p.name + ".m", p.r, p.c, p.m);
            tf.add(p.name + ".v", p.r, p.c, p.v);
        }
    }
    return tf;
}

template <typename T>
void file_to_store(const TensorFile& tf, ParamStore<T>& store) {
    for (auto& p : store.all()) {
        const TensorFile::Entry* e = tf.find(p.name);
        if (!e) throw ContractViolation("checkpoint missing tensor: " + p.name);
        if (e->r != p.r || e->c != p.c) throw ContractViolation("checkpoint shape mismatch: " + p.name);
        p.value = tf.values<T>(*e);
        if (const TensorFile::Entry* em = tf.find(p.name + ".m")) p.m = tf.values<T>(*em);
        if (const TensorFile::Entry* ev = tf.find(p.name + ".v")) p.v = tf.values<T>(*ev);
    }
}

}  // namespace dexflow
