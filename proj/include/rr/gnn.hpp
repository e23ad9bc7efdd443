#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rr/features.hpp"
#include "rr/graph.hpp"
#include "rr/params.hpp"
#include "rr/tape.hpp"

namespace rr::gnn {

enum class Modality { Ip, Category, Content, Url, Security };

const char* modality_name(Modality m);
Modality modality_from_name(const std::string& name);

// Model dimensions and switches. The ablation switches (--mean-pool,
// --no-modality-attn) are flags on the one code path, not forks.
struct ModelConfig {
    std::vector<Modality> modalities = {Modality::Ip, Modality::Category, Modality::Content,
                                        Modality::Url, Modality::Security};
    int layers = 2;   // L
    int hidden = 256;  // d
    double slope = 0.2;
    bool mean_pool = false;        // mean-pooling neighbor aggregation ablation
    bool concat_features = false;  // feature-concatenation ablation (skips modality attention)
    int cat_dim = 256;             // D_2, category lookup width
    int url_hidden = 256;          // D_4, recurrent hidden size
    int url_char_dim = 32;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;

    int input_dim(Modality m) const;
    int concat_input_dim() const;

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

// Glorot-uniform initialization of the full parameter collection under
// stable names; deterministic per (seed, name).
ParamStore init_params(const ModelConfig& cfg, uint64_t seed);

// Binds ParamStore tensors to tape leaves lazily and collects their
// gradients after backward().
struct ParamBind {
    nd::Tape& tape;
    ParamStore& params;
    std::map<std::string, nd::Tape::Id> bound;

    nd::Tape::Id operator()(const std::string& name);
    // Accumulate d(loss)/d(param) into grads (existing entries are added to).
    void collect_grads(std::map<std::string, nd::Tensor>& grads) const;
};

struct BnMode {
    bool train = false;            // batch statistics vs running statistics
    bool update_running = false;   // write back new running stats after forward
};

// Full encoder forward for every node of the subgraph: per-modality
// embedders, L rounds of attention-aggregate-update, L2 normalization, and
// modality attention fusing the M vectors (or the concat-feature single
// stack when that ablation is on). Returns one fused representation id per
// subgraph position.
std::vector<nd::Tape::Id> node_representations(ParamBind& pb, const graph::Subgraph& sg,
                                               const std::vector<const features::FeatureRecord*>& feats,
                                               const ModelConfig& cfg, BnMode bn);

// MLP edge head over concat(hu,hv), symmetrized over both concat orders.
nd::Tape::Id edge_probability(ParamBind& pb, nd::Tape::Id hu, nd::Tape::Id hv,
                              const ModelConfig& cfg);

}  // namespace rr::gnn
