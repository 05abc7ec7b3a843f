#include "camforge/fep.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "camforge/errors.hpp"

namespace camforge::drift {

std::vector<std::vector<FrameBuffer>> fep_generate(const model::Checkpoint& ckpt,
                                                   const std::vector<std::string>& prompts,
                                                   std::uint64_t latent_seed, int n_frames,
                                                   int denoise_steps, model::ForwardMode mode,
                                                   double probe_condition) {
    if (n_frames < 1 || denoise_steps < 1) {
        throw std::invalid_argument("fep_generate: n_frames and denoise_steps must be >= 1");
    }
    model::LatentSpec spec;
    spec.frames = n_frames;
    const Mat x_init =
        model::seeded_latent(latent_seed, spec.seq_len(), ckpt.config.model_dim);

    std::vector<std::vector<FrameBuffer>> outputs;
    outputs.reserve(prompts.size());
    for (const auto& prompt : prompts) {
        const Mat text =
            model::text_embedding(prompt, ckpt.config.text_tokens, ckpt.config.text_dim);
        Mat x = x_init;
        // Euler steps of the velocity field from t=1 toward t=0.
        const double dt = 1.0 / denoise_steps;
        for (int s = 0; s < denoise_steps; ++s) {
            const Mat v = model::model_forward(x, text, probe_condition, ckpt, mode);
            x -= dt * v;
        }
        outputs.push_back(model::decode_latent(x, spec));
    }
    return outputs;
}

SsfScore ssf_score(const EmbeddingSet& reference, const EmbeddingSet& candidate) {
    if (reference.provider != candidate.provider) {
        throw std::invalid_argument("ssf_score: embedding providers differ");
    }
    if (reference.prompts != candidate.prompts) {
        throw std::invalid_argument("ssf_score: prompt lists differ");
    }
    const Eigen::Index n = reference.vectors.rows();
    double sum = 0.0;
    int used = 0;
    int excluded = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = reference.vectors.row(i);
        const auto b = candidate.vectors.row(i);
        const double na = a.norm();
        const double nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
            ++excluded;
            continue;
        }
        double cosv;
        if (std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) ==
            0) {
            cosv = 1.0;  // identical rows: cosine is exactly 1 by definition
        } else {
            cosv = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
        }
        sum += cosv;
        ++used;
    }
    if (used == 0) throw std::domain_error("ssf_score: all rows excluded");
    return {sum / used, excluded};
}

GaussianStats gaussian_fit(const EmbeddingSet& set) {
    set.validate();
    const Eigen::Index p = set.vectors.rows();
    if (p < 2) throw std::domain_error("gaussian_fit: need at least 2 rows");

    GaussianStats g;
    g.mean = set.vectors.colwise().mean().transpose();
    const Mat centered = set.vectors.rowwise() - g.mean.transpose();
    Mat cov = (centered.transpose() * centered) / static_cast<double>(p - 1);
    g.cov = 0.5 * (cov + cov.transpose());
    return g;
}

namespace {

bool bitwise_equal(const GaussianStats& a, const GaussianStats& b) {
    return a.mean.size() == b.mean.size() && a.cov.rows() == b.cov.rows() &&
           a.cov.cols() == b.cov.cols() &&
           std::memcmp(a.mean.data(), b.mean.data(),
                       sizeof(double) * static_cast<std::size_t>(a.mean.size())) == 0 &&
           std::memcmp(a.cov.data(), b.cov.data(),
                       sizeof(double) * static_cast<std::size_t>(a.cov.size())) == 0;
}

// Symmetric PSD square root; clamps small negative eigenvalues at zero and
// rejects strongly non-PSD inputs.
Mat psd_sqrt(const Mat& m, const char* what) {
    const Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw NumericalError(std::string("eigendecomposition failed in ") + what);
    }
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    Vec lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -1e-9 * scale) {
            throw NumericalError(std::string("matrix is not PSD within tolerance in ") + what);
        }
        lambda[i] = std::sqrt(std::max(0.0, lambda[i]));
    }
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const GaussianStats& g1, const GaussianStats& g2) {
    if (g1.mean.size() != g2.mean.size()) {
        throw std::invalid_argument("frechet_distance: dimension mismatch");
    }
    if (bitwise_equal(g1, g2)) return 0.0;

    const double mean_term = (g1.mean - g2.mean).squaredNorm();

    // Tr((S1 S2)^{1/2}) computed on the symmetric form sqrt(S1) S2 sqrt(S1).
    const Mat s1_root = psd_sqrt(g1.cov, "frechet_distance(S1)");
    const Mat inner = s1_root * g2.cov * s1_root;
    const Mat sym = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed in frechet_distance");
    }
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    double trace_sqrt = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double lambda = eig.eigenvalues()[i];
        if (lambda < -1e-9 * scale) {
            throw NumericalError("product matrix is not PSD within tolerance in frechet_distance");
        }
        trace_sqrt += std::sqrt(std::max(0.0, lambda));
    }

    const double fd = mean_term + g1.cov.trace() + g2.cov.trace() - 2.0 * trace_sqrt;
    if (fd < -1e-8) {
        throw NumericalError("frechet_distance: negative beyond tolerance");
    }
    return std::max(0.0, fd);
}

FepMetrics fep_metrics(const EmbeddingSet& reference, const EmbeddingSet& candidate) {
    FepMetrics m;
    m.ssf = ssf_score(reference, candidate).value;
    m.ssfd = frechet_distance(gaussian_fit(reference), gaussian_fit(candidate));
    return m;
}

FepMetrics fep_baseline(const model::Checkpoint& pristine, const std::vector<std::string>& prompts,
                        const std::vector<std::uint64_t>& seeds, const EmbeddingProvider& provider,
                        int n_frames) {
    if (seeds.size() < 2) throw std::domain_error("fep_baseline: need at least 2 seeds");
    std::vector<EmbeddingSet> sets;
    sets.reserve(seeds.size());
    for (std::uint64_t seed : seeds) {
        const auto frames =
            fep_generate(pristine, prompts, seed, n_frames, 1, model::ForwardMode::pristine);
        sets.push_back(embed_clips(provider, prompts, frames));
    }
    // Average pairwise metrics against the first seed's set.
    FepMetrics acc{0.0, 0.0};
    int pairs = 0;
    for (std::size_t i = 1; i < sets.size(); ++i) {
        const FepMetrics m = fep_metrics(sets[0], sets[i]);
        acc.ssf += m.ssf;
        acc.ssfd += m.ssfd;
        ++pairs;
    }
    acc.ssf /= pairs;
    acc.ssfd /= pairs;
    return acc;
}

void DriftSeries::append(DriftPoint p) {
    if (!points.empty() && p.step <= points.back().step) {
        throw std::invalid_argument("DriftSeries: steps must be strictly increasing");
    }
    points.push_back(p);
}

double drift_rate(const DriftSeries& series) {
    const auto& pts = series.points;
    if (pts.size() < 2) throw std::domain_error("drift_rate: need at least 2 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& p : pts) {
        sx += static_cast<double>(p.step);
        sy += p.ssfd;
    }
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n;
    const double my = sy / n;
    double num = 0.0, den = 0.0;
    for (const auto& p : pts) {
        const double dx = static_cast<double>(p.step) - mx;
        num += dx * (p.ssfd - my);
        den += dx * dx;
    }
    if (den == 0.0) throw std::domain_error("drift_rate: degenerate step values");
    return num / den;
}

std::string drift_series_csv(const DriftSeries& series, const FepMetrics& baseline) {
    std::ostringstream os;
    os.precision(17);
    os << "step,ssf,ssfd,ssf_base,ssfd_base,v_drift_cumulative\n";
    DriftSeries prefix;
    for (const auto& p : series.points) {
        prefix.append(p);
        const double slope = (prefix.points.size() >= 2) ? drift_rate(prefix) : 0.0;
        os << p.step << ',' << p.ssf << ',' << p.ssfd << ',' << baseline.ssf << ','
           << baseline.ssfd << ',' << slope << '\n';
    }
    return os.str();
}

}  // namespace camforge::drift
