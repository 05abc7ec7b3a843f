#include "camforge/spectra.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "camforge/attention.hpp"
#include "camforge/errors.hpp"

namespace camforge::spectra {

SvdResult svd(const Mat& w) {
    if (!w.allFinite()) throw NumericalError("svd: matrix has non-finite entries");
    Eigen::JacobiSVD<Mat> solver(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("svd: decomposition did not converge");
    }
    SvdResult r;
    r.U = solver.matrixU();
    r.S = solver.singularValues();
    r.V = solver.matrixV();

    // sign convention: largest-magnitude entry of each U column positive
    for (Eigen::Index j = 0; j < r.U.cols(); ++j) {
        Eigen::Index arg = 0;
        r.U.col(j).cwiseAbs().maxCoeff(&arg);
        if (r.U(arg, j) < 0.0) {
            r.U.col(j) = -r.U.col(j);
            r.V.col(j) = -r.V.col(j);
        }
    }
    return r;
}

IntruderReport intruder_count(const Mat& w_pre, const Mat& w_lora, int k, double epsilon) {
    if (w_pre.rows() != w_lora.rows() || w_pre.cols() != w_lora.cols()) {
        throw std::invalid_argument("intruder_count: shape mismatch");
    }
    const Eigen::Index min_dim = std::min(w_pre.rows(), w_pre.cols());
    if (k < 1 || k > min_dim) {
        throw std::invalid_argument("intruder_count: k must lie in [1, min(dims)]");
    }

    const SvdResult pre = svd(w_pre);
    const SvdResult lora = svd(w_lora);

    IntruderReport report;
    report.k = k;
    report.epsilon = epsilon;
    report.vectors.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        // best |cos| over every pre-trained singular vector
        const Vec sims = (pre.U.transpose() * lora.U.col(j)).cwiseAbs();
        IntruderVector v;
        v.rank = j;
        v.s_max = sims.maxCoeff();
        v.is_intruder = v.s_max < epsilon;
        if (v.is_intruder) ++report.n_intruders;
        report.vectors.push_back(v);
    }
    return report;
}

double effective_rank(const Vec& s, RankMethod method, double tau) {
    if (s.size() == 0) throw std::domain_error("effective_rank: empty spectrum");
    for (Eigen::Index i = 0; i + 1 < s.size(); ++i) {
        if (s[i] < s[i + 1] - 1e-12 * std::max(1.0, s[i])) {
            throw std::invalid_argument("effective_rank: spectrum must be non-increasing");
        }
    }
    if (s[0] <= 0.0) throw std::domain_error("effective_rank: zero spectrum");

    if (method == RankMethod::threshold) {
        int count = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s[i] / s[0] > tau) ++count;
        }
        return static_cast<double>(count);
    }
    const double total = s.sum();
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double p = s[i] / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

namespace {

// Same RMS normalization the attention block applies to its queries and text
// keys (single head). Raw unit-norm principal directions would flatten the
// softmax toward uniform and collapse every response to rank one.
Mat rms_rows(const Mat& m) {
    Mat out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double rms =
            std::sqrt(m.row(i).squaredNorm() / static_cast<double>(m.cols()) + 1e-6);
        out.row(i) = m.row(i) / rms;
    }
    return out;
}

}  // namespace

SpectrumReport principal_showdown(const Mat& wq, const Mat& wk, const Mat& wv,
                                  const model::CondAdapter& adapter, double c_strong, int n,
                                  double tau) {
    const SvdResult uq = svd(wq.transpose());
    const SvdResult uk = svd(wk.transpose());
    const SvdResult uv = svd(wv.transpose());
    if (n < 1 || n > uq.U.cols() || n > uk.U.cols() || n > uv.U.cols()) {
        throw std::invalid_argument("principal_showdown: N exceeds available singular vectors");
    }

    const Mat q_test = rms_rows(uq.U.leftCols(n).transpose());
    const Mat k_text_test = rms_rows(uk.U.leftCols(n).transpose());
    const Mat v_text_test = uv.U.leftCols(n).transpose();
    if (q_test.cols() != k_text_test.cols()) {
        throw std::invalid_argument(
            "principal_showdown: text and model widths differ; the testbench needs square "
            "cross-attention projections");
    }

    const Mat y_text = model::scaled_attention(q_test, k_text_test, v_text_test);

    const Vec e_cond = model::embed_condition(c_strong, adapter);
    Mat k_cond, v_cond;
    const int model_dim = static_cast<int>(wq.cols());
    const int n_tokens = static_cast<int>(adapter.kproj_w.rows()) / model_dim;
    model::adapter_kv(e_cond, adapter, n_tokens, model_dim, &k_cond, &v_cond);
    const Mat y_cond = model::scaled_attention(q_test, k_cond, v_cond);

    const Vec s_text = svd(y_text).S;
    const Vec s_cond = svd(y_cond).S;
    if (s_text[0] <= 0.0) {
        throw NumericalError("principal_showdown: text response is identically zero");
    }
    if (s_cond[0] <= 0.0) {
        throw NumericalError(
            "principal_showdown: conditional response is identically zero (untrained adapter?)");
    }

    SpectrumReport report;
    report.c_strong = c_strong;
    report.s_text = s_text / s_text[0];
    report.s_cond = s_cond / s_cond[0];
    report.r_text_threshold = effective_rank(s_text, RankMethod::threshold, tau);
    report.r_cond_threshold = effective_rank(s_cond, RankMethod::threshold, tau);
    report.r_text_entropy = effective_rank(s_text, RankMethod::entropy);
    report.r_cond_entropy = effective_rank(s_cond, RankMethod::entropy);
    return report;
}

int DepthSweep::total_intruders() const {
    int total = 0;
    for (const auto& r : reports) total += r.n_intruders;
    return total;
}

namespace {

const Mat& pick_weight(const model::BlockWeights& bw, const std::string& target) {
    if (target == "q") return bw.wq;
    if (target == "k") return bw.wk;
    if (target == "v") return bw.wv;
    if (target == "o") return bw.wo;
    throw std::invalid_argument("depth_sweep: unknown target " + target);
}

const model::LoraPair& pick_lora(const model::BlockLora& bl, const std::string& target) {
    if (target == "q") return bl.q;
    if (target == "k") return bl.k;
    if (target == "v") return bl.v;
    return bl.o;
}

}  // namespace

DepthSweep depth_sweep(const model::Checkpoint& pre, const model::Checkpoint& post,
                       const std::vector<std::string>& targets, int k, double epsilon) {
    if (pre.config.n_blocks != post.config.n_blocks ||
        pre.config.model_dim != post.config.model_dim ||
        pre.config.text_dim != post.config.text_dim) {
        throw std::invalid_argument("depth_sweep: checkpoint architectures differ");
    }

    DepthSweep sweep;
    sweep.n_blocks = pre.config.n_blocks;
    sweep.targets = targets;
    for (int i = 0; i < pre.config.n_blocks; ++i) {
        for (const auto& target : targets) {
            const Mat w_a = model::merged_weight(
                pick_weight(pre.blocks[static_cast<std::size_t>(i)], target),
                pick_lora(pre.lora[static_cast<std::size_t>(i)], target), pre.config.lora_scale());
            const Mat w_b = model::merged_weight(
                pick_weight(post.blocks[static_cast<std::size_t>(i)], target),
                pick_lora(post.lora[static_cast<std::size_t>(i)], target),
                post.config.lora_scale());
            const int k_eff =
                std::min<int>(k, static_cast<int>(std::min(w_a.rows(), w_a.cols())));
            IntruderReport report = intruder_count(w_a, w_b, k_eff, epsilon);
            report.block = i;
            report.target = target;
            sweep.reports.push_back(std::move(report));
        }
    }
    return sweep;
}

std::string heatmap_csv(const DepthSweep& sweep) {
    std::ostringstream os;
    os.precision(17);
    os << "block,target,vector_rank,s_max,is_intruder\n";
    for (const auto& r : sweep.reports) {
        for (const auto& v : r.vectors) {
            os << r.block << ',' << r.target << ',' << v.rank << ',' << v.s_max << ','
               << (v.is_intruder ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

std::string spectrum_csv(const SpectrumReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "kind,index,sigma_normalized\n";
    for (Eigen::Index i = 0; i < report.s_text.size(); ++i) {
        os << "text," << i << ',' << report.s_text[i] << '\n';
    }
    for (Eigen::Index i = 0; i < report.s_cond.size(); ++i) {
        os << "cond," << i << ',' << report.s_cond[i] << '\n';
    }
    return os.str();
}

std::string summary_json(const DepthSweep& sweep,
                         const std::vector<std::pair<int, SpectrumReport>>& showdowns) {
    nlohmann::json j;
    j["n_blocks"] = sweep.n_blocks;
    j["targets"] = sweep.targets;
    j["total_intruders"] = sweep.total_intruders();
    nlohmann::json blocks = nlohmann::json::array();
    for (int i = 0; i < sweep.n_blocks; ++i) {
        nlohmann::json bj;
        bj["block"] = i;
        int count = 0;
        for (const auto& r : sweep.reports) {
            if (r.block == i) count += r.n_intruders;
        }
        bj["intruders"] = count;
        blocks.push_back(bj);
    }
    j["blocks"] = blocks;
    nlohmann::json ranks = nlohmann::json::array();
    for (const auto& [block, report] : showdowns) {
        nlohmann::json rj;
        rj["block"] = block;
        rj["r_text_threshold"] = report.r_text_threshold;
        rj["r_cond_threshold"] = report.r_cond_threshold;
        rj["r_text_entropy"] = report.r_text_entropy;
        rj["r_cond_entropy"] = report.r_cond_entropy;
        rj["c_strong"] = report.c_strong;
        ranks.push_back(rj);
    }
    j["showdowns"] = ranks;
    return j.dump(2) + "\n";
}

}  // namespace camforge::spectra
