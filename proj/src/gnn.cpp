#include "rr/gnn.hpp"

#include <cmath>
#include <stdexcept>

#include "rr/rng.hpp"

namespace rr::gnn {

using nd::Tape;
using nd::Tensor;

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Ip: return "ip";
        case Modality::Category: return "category";
        case Modality::Content: return "content";
        case Modality::Url: return "url";
        case Modality::Security: return "security";
    }
    throw std::logic_error("bad modality");
}

Modality modality_from_name(const std::string& name) {
    for (Modality m : {Modality::Ip, Modality::Category, Modality::Content, Modality::Url,
                       Modality::Security})
        if (name == modality_name(m)) return m;
    throw std::invalid_argument("unknown modality: " + name);
}

int ModelConfig::input_dim(Modality m) const {
    switch (m) {
        case Modality::Ip: return features::kIpBits;
        case Modality::Category: return cat_dim;
        case Modality::Content: return features::kContentDim;
        case Modality::Url: return url_hidden;
        case Modality::Security: return features::kSecurityDim;
    }
    throw std::logic_error("bad modality");
}

int ModelConfig::concat_input_dim() const {
    int n = 0;
    for (Modality m : modalities) n += input_dim(m);
    return n;
}

nlohmann::json ModelConfig::to_json() const {
    nlohmann::json mods = nlohmann::json::array();
    for (Modality m : modalities) mods.push_back(modality_name(m));
    return {{"modalities", mods},     {"layers", layers},
            {"hidden", hidden},       {"slope", slope},
            {"mean_pool", mean_pool}, {"concat_features", concat_features},
            {"cat_dim", cat_dim},     {"url_hidden", url_hidden},
            {"url_char_dim", url_char_dim}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    if (j.contains("modalities")) {
        c.modalities.clear();
        for (const auto& m : j["modalities"]) c.modalities.push_back(modality_from_name(m.get<std::string>()));
    }
    c.layers = j.value("layers", c.layers);
    c.hidden = j.value("hidden", c.hidden);
    c.slope = j.value("slope", c.slope);
    c.mean_pool = j.value("mean_pool", c.mean_pool);
    c.concat_features = j.value("concat_features", c.concat_features);
    c.cat_dim = j.value("cat_dim", c.cat_dim);
    c.url_hidden = j.value("url_hidden", c.url_hidden);
    c.url_char_dim = j.value("url_char_dim", c.url_char_dim);
    return c;
}

namespace {

bool has_modality(const ModelConfig& cfg, Modality m) {
    for (Modality x : cfg.modalities)
        if (x == m) return true;
    return false;
}

Tensor glorot(std::vector<int> shape, uint64_t seed, const std::string& name) {
    Tensor t = Tensor::zeros(shape);
    int fan_in = shape.size() == 2 ? shape[0] : static_cast<int>(t.numel());
    int fan_out = shape.size() == 2 ? shape[1] : 1;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    auto rng = make_rng(seed, "init:" + name);
    for (double& v : t.data) v = uniform_real(rng, -bound, bound);
    return t;
}

std::string layer_prefix(const ModelConfig& cfg, int modality_index, int layer) {
    const std::string mod = cfg.concat_features
                                ? std::string("concat")
                                : std::string("m") + std::to_string(modality_index + 1);
    return "gnn." + mod + ".l" + std::to_string(layer) + ".";
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg, uint64_t seed) {
    ParamStore ps;
    auto put = [&](const std::string& name, std::vector<int> shape) {
        ps.tensors.emplace(name, glorot(std::move(shape), seed, name));
    };
    auto put_zeros = [&](const std::string& name, std::vector<int> shape) {
        ps.tensors.emplace(name, Tensor::zeros(std::move(shape)));
    };

    if (has_modality(cfg, Modality::Category))
        put("emb.category.table", {features::kCategoryCount, cfg.cat_dim});
    if (has_modality(cfg, Modality::Url)) {
        put("emb.url.chars", {features::kUrlVocab, cfg.url_char_dim});
        put("emb.url.w", {cfg.url_char_dim + cfg.url_hidden, 4 * cfg.url_hidden});
        put_zeros("emb.url.b", {4 * cfg.url_hidden});
    }
    if (has_modality(cfg, Modality::Security)) {
        Tensor gamma = Tensor::zeros({features::kSecurityDim});
        for (double& v : gamma.data) v = 1.0;
        ps.tensors.emplace("emb.sec.gamma", std::move(gamma));
        put_zeros("emb.sec.beta", {features::kSecurityDim});
        put_zeros("emb.sec.run_mean", {features::kSecurityDim});
        Tensor rv = Tensor::zeros({features::kSecurityDim});
        for (double& v : rv.data) v = 1.0;
        ps.tensors.emplace("emb.sec.run_var", std::move(rv));
        ps.frozen.insert("emb.sec.run_mean");
        ps.frozen.insert("emb.sec.run_var");
    }

    const int stacks = cfg.concat_features ? 1 : static_cast<int>(cfg.modalities.size());
    for (int s = 0; s < stacks; ++s) {
        for (int l = 1; l <= cfg.layers; ++l) {
            const int in = l == 1 ? (cfg.concat_features ? cfg.concat_input_dim()
                                                         : cfg.input_dim(cfg.modalities[static_cast<size_t>(s)]))
                                  : cfg.hidden;
            const std::string pre = layer_prefix(cfg, s, l);
            put(pre + "W_layer", {2 * in, cfg.hidden});
            put(pre + "W_attn", {in, cfg.hidden});
            put(pre + "a", {cfg.hidden});
        }
    }

    if (!cfg.concat_features) {
        put("modattn.W1", {cfg.hidden, cfg.hidden});
        for (size_t m = 0; m < cfg.modalities.size(); ++m)
            put("modattn.b." + std::to_string(m + 1), {cfg.hidden});
        put_zeros("modattn.bias", {});
    }

    put("head.W_f", {2 * cfg.hidden, cfg.hidden});
    put("head.f.w", {cfg.hidden});
    put_zeros("head.f.b", {});
    return ps;
}

Tape::Id ParamBind::operator()(const std::string& name) {
    auto it = bound.find(name);
    if (it != bound.end()) return it->second;
    const bool trainable = params.frozen.count(name) == 0;
    Tape::Id id = tape.leaf(params.at(name), trainable);
    bound.emplace(name, id);
    return id;
}

void ParamBind::collect_grads(std::map<std::string, nd::Tensor>& grads) const {
    for (const auto& [name, id] : bound) {
        if (params.frozen.count(name)) continue;
        Tensor g = tape.grad(id);
        auto it = grads.find(name);
        if (it == grads.end()) {
            grads.emplace(name, std::move(g));
        } else {
            for (size_t i = 0; i < g.data.size(); ++i) it->second.data[i] += g.data[i];
        }
    }
}

namespace {

// Single recurrent pass (LSTM-form gated cell) over per-character
// embeddings; returns the final hidden state.
Tape::Id encode_url(ParamBind& pb, const std::string& url, const ModelConfig& cfg) {
    if (url.empty()) throw std::invalid_argument("encode_url: empty URL");
    Tape& t = pb.tape;
    const int H = cfg.url_hidden;
    Tape::Id W = pb("emb.url.w");
    Tape::Id b = pb("emb.url.b");
    Tape::Id table = pb("emb.url.chars");
    Tape::Id h = t.constant(Tensor::zeros({H}));
    Tape::Id c = t.constant(Tensor::zeros({H}));
    const size_t len = std::min(url.size(), static_cast<size_t>(features::kMaxUrlLen));
    for (size_t p = 0; p < len; ++p) {
        Tape::Id x = t.row(table, features::url_char_id(url[p]));
        Tape::Id z = t.add(t.vecmat(t.concat({x, h}), W), b);
        Tape::Id gi = t.sigmoid(t.slice(z, 0, H));
        Tape::Id gf = t.sigmoid(t.slice(z, H, H));
        Tape::Id go = t.sigmoid(t.slice(z, 2 * H, H));
        Tape::Id gg = t.tanh_(t.slice(z, 3 * H, H));
        c = t.add(t.mul(gf, c), t.mul(gi, gg));
        h = t.mul(go, t.tanh_(c));
    }
    return h;
}

// Batch-normalized security features for all subgraph nodes; one row per
// position.
Tape::Id security_rows(ParamBind& pb, const std::vector<const features::FeatureRecord*>& feats,
                       const ModelConfig& cfg, BnMode bn) {
    Tape& t = pb.tape;
    const int F = features::kSecurityDim;
    Tensor x = Tensor::zeros({static_cast<int>(feats.size()), F});
    for (size_t i = 0; i < feats.size(); ++i) {
        const auto v = feats[i]->security.as_vector();
        std::copy(v.begin(), v.end(), x.data.begin() + static_cast<int64_t>(i) * F);
    }
    Tape::Id gamma = pb("emb.sec.gamma");
    Tape::Id beta = pb("emb.sec.beta");
    if (bn.train) {
        Tensor mean, var;
        Tape::Id y = t.batchnorm_train(t.constant(std::move(x)), gamma, beta, cfg.bn_eps, &mean, &var);
        if (bn.update_running) {
            Tensor& rm = pb.params.at("emb.sec.run_mean");
            Tensor& rv = pb.params.at("emb.sec.run_var");
            for (int j = 0; j < F; ++j) {
                rm.data[static_cast<size_t>(j)] =
                    (1.0 - cfg.bn_momentum) * rm.data[static_cast<size_t>(j)] + cfg.bn_momentum * mean.data[static_cast<size_t>(j)];
                rv.data[static_cast<size_t>(j)] =
                    (1.0 - cfg.bn_momentum) * rv.data[static_cast<size_t>(j)] + cfg.bn_momentum * var.data[static_cast<size_t>(j)];
            }
        }
        return y;
    }
    // infer mode: pure function of the frozen running stats
    const Tensor& rm = pb.params.at("emb.sec.run_mean");
    const Tensor& rv = pb.params.at("emb.sec.run_var");
    for (int i = 0; i < static_cast<int>(feats.size()); ++i)
        for (int j = 0; j < F; ++j)
            x.at(i, j) = (x.at(i, j) - rm.data[static_cast<size_t>(j)]) /
                         std::sqrt(rv.data[static_cast<size_t>(j)] + cfg.bn_eps);
    return t.add_rowvec(t.mul_rowvec(t.constant(std::move(x)), gamma), beta);
}

// Modality input vectors x_v^m for every subgraph position.
std::vector<Tape::Id> modality_inputs(ParamBind& pb, Modality m,
                                      const std::vector<const features::FeatureRecord*>& feats,
                                      const ModelConfig& cfg, BnMode bn) {
    Tape& t = pb.tape;
    std::vector<Tape::Id> out(feats.size());
    switch (m) {
        case Modality::Ip:
            for (size_t i = 0; i < feats.size(); ++i)
                out[i] = t.constant(Tensor::vec(features::embed_ip(feats[i]->ip)));
            break;
        case Modality::Category: {
            Tape::Id table = pb("emb.category.table");
            for (size_t i = 0; i < feats.size(); ++i) {
                if (feats[i]->category < 0 || feats[i]->category >= features::kCategoryCount)
                    throw std::out_of_range("category id out of range");
                out[i] = t.row(table, feats[i]->category);
            }
            break;
        }
        case Modality::Content:
            for (size_t i = 0; i < feats.size(); ++i)
                out[i] = t.constant(Tensor::vec(features::embed_content(feats[i]->content)));
            break;
        case Modality::Url:
            for (size_t i = 0; i < feats.size(); ++i) out[i] = encode_url(pb, feats[i]->url, cfg);
            break;
        case Modality::Security: {
            Tape::Id rows = security_rows(pb, feats, cfg, bn);
            for (size_t i = 0; i < feats.size(); ++i) out[i] = t.row(rows, static_cast<int>(i));
            break;
        }
    }
    return out;
}

// One L-layer message-passing stack over the subgraph; returns the
// L2-normalized final representation per position.
std::vector<Tape::Id> run_stack(ParamBind& pb, const graph::Subgraph& sg,
                                std::vector<Tape::Id> h, const ModelConfig& cfg,
                                int modality_index) {
    Tape& t = pb.tape;
    const int n = static_cast<int>(sg.nodes.size());
    for (int l = 1; l <= cfg.layers; ++l) {
        const std::string pre = layer_prefix(cfg, modality_index, l);
        Tape::Id W_layer = pb(pre + "W_layer");
        Tape::Id W_attn = pb(pre + "W_attn");
        Tape::Id a = pb(pre + "a");
        const int in_dim = t.val(h[0]).shape[0];

        // attention projections computed once per node per layer
        std::vector<Tape::Id> proj(static_cast<size_t>(n));
        if (!cfg.mean_pool)
            for (int i = 0; i < n; ++i) proj[static_cast<size_t>(i)] = t.vecmat(h[static_cast<size_t>(i)], W_attn);

        std::vector<Tape::Id> h_next(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) {
            const auto& nb = sg.adj[static_cast<size_t>(v)];
            Tape::Id agg;
            if (nb.empty()) {
                agg = t.constant(Tensor::zeros({in_dim}));
            } else {
                Tape::Id alpha;
                if (cfg.mean_pool) {
                    alpha = t.constant(Tensor::vec(std::vector<double>(
                        nb.size(), 1.0 / static_cast<double>(nb.size()))));
                } else {
                    std::vector<Tape::Id> logits(nb.size());
                    for (size_t u = 0; u < nb.size(); ++u)
                        logits[u] = t.dot(a, t.add(proj[static_cast<size_t>(nb[u])], proj[static_cast<size_t>(v)]));
                    alpha = t.softmax(t.leaky_relu(t.stack_scalars(logits), cfg.slope));
                }
                std::vector<Tape::Id> nb_reps(nb.size());
                for (size_t u = 0; u < nb.size(); ++u) nb_reps[u] = h[static_cast<size_t>(nb[u])];
                agg = t.weighted_sum(nb_reps, alpha);
            }
            h_next[static_cast<size_t>(v)] =
                t.leaky_relu(t.vecmat(t.concat({h[static_cast<size_t>(v)], agg}), W_layer), cfg.slope);
        }
        h = std::move(h_next);
    }
    for (auto& id : h) id = t.l2_normalize(id);
    return h;
}

}  // namespace

std::vector<Tape::Id> node_representations(ParamBind& pb, const graph::Subgraph& sg,
                                           const std::vector<const features::FeatureRecord*>& feats,
                                           const ModelConfig& cfg, BnMode bn) {
    if (sg.hops < cfg.layers)
        throw std::invalid_argument("node_representations: subgraph covers fewer hops than GNN layers");
    if (feats.size() != sg.nodes.size())
        throw std::invalid_argument("node_representations: feature count mismatch");
    Tape& t = pb.tape;
    const size_t n = sg.nodes.size();

    if (cfg.concat_features) {
        // feature-concatenation ablation: one GNN over concat(x^1..x^M),
        // modality attention skipped
        std::vector<std::vector<Tape::Id>> per_mod;
        for (Modality m : cfg.modalities) per_mod.push_back(modality_inputs(pb, m, feats, cfg, bn));
        std::vector<Tape::Id> h(n);
        for (size_t i = 0; i < n; ++i) {
            std::vector<Tape::Id> parts;
            for (const auto& mod : per_mod) parts.push_back(mod[i]);
            h[i] = t.concat(parts);
        }
        return run_stack(pb, sg, std::move(h), cfg, 0);
    }

    std::vector<std::vector<Tape::Id>> h_mod;  // [modality][position]
    for (size_t m = 0; m < cfg.modalities.size(); ++m) {
        std::vector<Tape::Id> h0 = modality_inputs(pb, cfg.modalities[m], feats, cfg, bn);
        h_mod.push_back(run_stack(pb, sg, std::move(h0), cfg, static_cast<int>(m)));
    }

    Tape::Id W1 = pb("modattn.W1");
    Tape::Id bias = pb("modattn.bias");
    std::vector<Tape::Id> b_m(cfg.modalities.size());
    for (size_t m = 0; m < cfg.modalities.size(); ++m)
        b_m[m] = pb("modattn.b." + std::to_string(m + 1));

    std::vector<Tape::Id> fused(n);
    for (size_t i = 0; i < n; ++i) {
        std::vector<Tape::Id> scores(cfg.modalities.size());
        std::vector<Tape::Id> reps(cfg.modalities.size());
        for (size_t m = 0; m < cfg.modalities.size(); ++m) {
            reps[m] = h_mod[m][i];
            scores[m] = t.leaky_relu(t.add(t.dot(b_m[m], t.matmul(W1, reps[m])), bias), cfg.slope);
        }
        Tape::Id beta = t.softmax(t.stack_scalars(scores));
        fused[i] = t.weighted_sum(reps, beta);
    }
    return fused;
}

Tape::Id edge_probability(ParamBind& pb, Tape::Id hu, Tape::Id hv, const ModelConfig& cfg) {
    Tape& t = pb.tape;
    if (t.val(hu).shape != t.val(hv).shape || t.val(hu).rank() != 1)
        throw std::invalid_argument("edge_probability: node embeddings must be 1-D and equal-sized");
    Tape::Id W_f = pb("head.W_f");
    Tape::Id fw = pb("head.f.w");
    Tape::Id fb = pb("head.f.b");
    auto one_order = [&](Tape::Id a, Tape::Id b) {
        Tape::Id he = t.leaky_relu(t.vecmat(t.concat({a, b}), W_f), cfg.slope);
        return t.sigmoid(t.add(t.dot(fw, he), fb));
    };
    // averaged over both concat orders so the undirected edge is symmetric
    return t.scale(t.add(one_order(hu, hv), one_order(hv, hu)), 0.5);
}

}  // namespace rr::gnn
