#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "rr/tensor.hpp"

namespace rr {

// Named, ordered collection of every trainable weight plus the batch-norm
// running statistics. This is the unit of federated exchange: clients and
// the server always hold name/shape-identical collections.
struct ParamStore {
    std::map<std::string, nd::Tensor> tensors;
    std::set<std::string> frozen;  // not optimized (running stats), still averaged and serialized

    nd::Tensor& at(const std::string& name) { return tensors.at(name); }
    const nd::Tensor& at(const std::string& name) const { return tensors.at(name); }
    bool has(const std::string& name) const { return tensors.count(name) != 0; }

    int64_t scalar_count() const {
        int64_t n = 0;
        for (const auto& [k, v] : tensors) n += v.numel();
        return n;
    }

    bool compatible_with(const ParamStore& o) const {
        if (tensors.size() != o.tensors.size()) return false;
        auto it = o.tensors.begin();
        for (const auto& [k, v] : tensors) {
            if (it == o.tensors.end() || it->first != k || it->second.shape != v.shape) return false;
            ++it;
        }
        return true;
    }
};

}  // namespace rr
