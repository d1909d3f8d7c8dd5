#pragma once

#include <map>
#include <string>
#include <vector>

#include "gpse/layers.hpp"
#include "gpse/pse.hpp"

namespace gpse {

/// Message-passing backbone variant. GatedGcn is the real encoder; the other
/// two exist for architecture comparisons.
enum class ConvKind { GatedGcn, Gin, Gcn };

std::string conv_kind_name(ConvKind k);
ConvKind conv_kind_from_name(const std::string& name);

struct GPSEConfig {
    int rand_feat_dim = 20;  // k: width of the random node features
    int hidden_dim = 128;    // d (desk default; 512 at full scale)
    int num_layers = 10;     // N (desk default; 20 at full scale)
    int head_depth = 2;
    bool independent_heads = true;  // one MLP head per PSE family
    ConvKind conv = ConvKind::GatedGcn;
    bool virtual_node = true;
    double lr = 1e-3;
    double warmup_frac = 0.05;
    double clip_norm = 1.0;  // global gradient-norm clip; 0 disables
    int epochs = 100;
    int batch_size = 32;
    uint64_t seed = 0;
    bool resample_features_each_epoch = true;

    /// Throws std::invalid_argument on k > d, N < 1, head_depth < 1, or
    /// non-positive dims.
    void validate() const;
    std::string to_json() const;
    static GPSEConfig from_json(const std::string& text);
};

/// The assembled encoder: projection, N message-passing blocks with optional
/// virtual-node updates, and the prediction heads. Parameters live in the
/// ParamStore in registration order (the checkpoint payload order).
struct GPSEModel {
    GPSEConfig cfg;
    ParamStore params;

    LinearLayer proj;  // k -> d
    std::vector<GatedGcnLayer> gated_layers;
    std::vector<GinLayer> gin_layers;
    std::vector<GcnLayer> gcn_layers;
    std::vector<VirtualNodeLayer> vn_layers;
    std::vector<Mlp> node_heads;   // outputs concatenate to n x 51
    std::vector<Mlp> graph_heads;  // outputs concatenate to G x 11

    /// Corpus-wide z-score statistics for the 11 graph-level targets, frozen
    /// from the training split so a saved encoder is self-contained.
    std::vector<double> graph_target_mean;
    std::vector<double> graph_target_std;
};

/// Deterministic initialization: uniform fan-in scaling per seed.
GPSEModel init_model(const GPSEConfig& cfg);

struct ForwardResult {
    Tensor node_states;  // n x d, pre-head
    Tensor graph_states; // G x d (virtual-node state, or sum pooling without VN)
    Tensor node_pred;    // n x 51
    Tensor graph_pred;   // G x 11
};

ForwardResult forward_batch(const GPSEModel& model, const Batch& batch, const DenseMatrix& feats);

/// Final node states for one graph. Features are N(0,1) draws derived from
/// (seed, draw index); draws > 1 averages the states elementwise.
DenseMatrix encode(const GPSEModel& model, const Graph& g, uint64_t seed, int draws = 1);

struct RecoveryReport {
    std::vector<std::pair<std::string, double>> family_r2;  // six families, fixed order
    double overall = 0.0;                                   // unweighted mean
    std::vector<double> train_loss;                         // per epoch
    std::vector<double> val_loss;                           // per epoch
    int best_epoch = -1;
};

/// Pre-computed supervision for a corpus: per-graph node targets (z-scored
/// per graph) and graph targets z-scored with the model's frozen statistics.
struct TargetCache {
    std::vector<TargetBundle> bundles;  // node targets normalized; graph raw
};

TargetCache compute_target_cache(const GraphCorpus& corpus);

/// Trains on the corpus's train split, tracking validation loss per epoch and
/// returning the parameters of the best-validation epoch. Throws
/// std::runtime_error with diagnostics if the loss turns non-finite.
RecoveryReport train(GPSEModel& model, const GraphCorpus& corpus, const TargetCache& targets);

/// R^2 per PSE family over all values of the given split, plus the unweighted
/// mean as Overall. Uses a fixed feature seed per graph.
RecoveryReport evaluate_recovery(const GPSEModel& model, const GraphCorpus& corpus,
                                 const TargetCache& targets, Split split);

void save_checkpoint(const GPSEModel& model, const std::string& path);
GPSEModel load_checkpoint(const std::string& path);

/// Binary encodings export (magic GPSEENC1); csv = true writes one row per
/// node instead: graph_id,node_id,e0..e{d-1}.
void export_encodings(const GPSEModel& model, const GraphCorpus& corpus, const std::string& path,
                      uint64_t seed, bool csv = false, int draws = 1);

}  // namespace gpse
