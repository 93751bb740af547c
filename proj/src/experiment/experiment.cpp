#include "sparsegrow/experiment/experiment.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sparsegrow/data/pipeline.hpp"
#include "sparsegrow/dst/erdos_renyi.hpp"
#include "sparsegrow/experiment/sidecar.hpp"
#include "sparsegrow/nn/loss.hpp"
#include "sparsegrow/nn/optimizer.hpp"

namespace sparsegrow {

namespace fs = std::filesystem;

int exit_code_for_current_exception() noexcept {
    try {
        throw;
    } catch (const DatasetError&) {
        return exit_missing_data;
    } catch (const ParseError&) {
        return exit_missing_data;
    } catch (const InfeasibleSparsity&) {
        return exit_infeasible_sparsity;
    } catch (const NumericFailure&) {
        return exit_numeric_failure;
    } catch (...) {
        return exit_usage;
    }
}

std::string metrics_csv_row(const MetricsRecord& m) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f,%.6f,%.6g,%zu,%zu,%zu,%.3f,%.3f", m.epoch, m.step,
                  m.train_loss, m.train_acc, m.test_acc, m.lr, m.active_connections, m.rounds_done,
                  m.rounds_in_epoch, m.mean_subset, m.mean_k);
    return buf;
}

std::size_t steps_per_epoch(std::size_t n, std::size_t batch_size) { return (n + batch_size - 1) / batch_size; }

namespace {

fs::path data_dir(const ExperimentConfig& c) {
    return c.data_dir.empty() ? fs::path("data") / c.dataset : fs::path(c.data_dir);
}

void truncate(Dataset& d, std::size_t limit) {
    if (limit == 0 || limit >= d.size()) return;
    d.labels.resize(limit);
    d.images.resize(limit * d.sample_units());
}

}  // namespace

DataShape data_shape(const ExperimentConfig& c) {
    DataShape s;
    if (c.dataset == "mnist") {
        s = {1, 28, 28, 10, 60000};
    } else if (c.dataset == "cifar10") {
        s = {3, 32, 32, 10, 50000};
    } else if (c.dataset == "cifar100") {
        s = {3, 32, 32, 100, 50000};
    } else if (c.dataset == "synthetic") {
        s = {1, 1, c.synthetic_dims, c.synthetic_classes, c.synthetic_train};
    } else {
        throw ConfigError("unknown dataset '" + c.dataset + "'");
    }
    if (c.train_limit) s.train_size = std::min(s.train_size, c.train_limit);
    return s;
}

std::pair<Dataset, Dataset> load_datasets(const ExperimentConfig& c) {
    Dataset train, test;
    if (c.dataset == "synthetic") {
        Rng rng = Rng(c.seed).fork(0xda7a);
        Dataset all = synthetic_classification(c.synthetic_train + c.synthetic_test, c.synthetic_classes,
                                               c.synthetic_dims, c.synthetic_separation, rng);
        train = test = all;
        train.split = Split::train;
        test.split = Split::test;
        const std::size_t units = all.sample_units();
        train.labels.resize(c.synthetic_train);
        train.images.resize(c.synthetic_train * units);
        test.labels.erase(test.labels.begin(), test.labels.begin() + std::ptrdiff_t(c.synthetic_train));
        test.images.erase(test.images.begin(), test.images.begin() + std::ptrdiff_t(c.synthetic_train * units));
    } else {
        const fs::path dir = data_dir(c);
        if (c.dataset == "mnist") {
            train = load_mnist(dir, Split::train);
            test = load_mnist(dir, Split::test);
        } else if (c.dataset == "cifar10") {
            train = load_cifar10(dir, Split::train);
            test = load_cifar10(dir, Split::test);
        } else {
            for (const char* f : {"train.bin", "test.bin"})
                if (!fs::exists(dir / f)) throw DatasetError("CIFAR-100 file not found: " + (dir / f).string());
            train = load_cifar100_binary(dir / "train.bin", Split::train);
            test = load_cifar100_binary(dir / "test.bin", Split::test);
        }
        const auto k = NormalizationConstants::for_dataset(c.dataset);
        normalize(train, k);
        normalize(test, k);
    }
    truncate(train, c.train_limit);
    truncate(test, c.test_limit);
    return {std::move(train), std::move(test)};
}

ModelSpec model_spec(const ExperimentConfig& c) {
    const DataShape s = data_shape(c);
    const real smoothing = real(c.label_smoothing);
    if (c.model == "small_cnn")
        return ModelSpec::small_cnn(s.channels, s.height, s.width, s.classes, c.cnn_channels1, c.cnn_channels2,
                                    smoothing);
    std::vector<std::size_t> widths{s.channels * s.height * s.width};
    widths.insert(widths.end(), c.hidden.begin(), c.hidden.end());
    widths.push_back(s.classes);
    return ModelSpec::mlp(widths, smoothing);
}

double evaluate(const Model& model, const Dataset& data, unsigned threads) {
    if (data.size() == 0) return 0.0;
    std::size_t correct = 0;
    const BatchSequence seq(data, 1000);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const Batch b = seq[i];
        const ActivationCache cache = forward(model, b.inputs, threads);
        const Matrix& z = cache.logits();
        for (std::size_t j = 0; j < z.cols(); ++j) {
            std::size_t best = 0;
            for (std::size_t r = 1; r < z.rows(); ++r)
                if (z(r, j) > z(best, j)) best = r;
            correct += int(best) == b.labels[j];
        }
    }
    return double(correct) / double(data.size());
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write " + path.string());
    out << text;
}

void log_round(std::ostream& out, const RoundReport& r) {
    for (std::size_t l = 0; l < r.layers.size(); ++l) {
        const auto& s = r.layers[l];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%zu,%.9f,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu\n", r.step, r.alpha_t, r.k,
                      r.floor_guard_hits, l, s.active_before, s.active_after, s.sampled, s.candidates, s.pruned,
                      s.grown);
        out << buf;
    }
}

std::string weight_summary(const Model& m) {
    std::ostringstream os;
    for (std::size_t l = 0; l < m.params.size(); ++l) {
        double ss = 0;
        std::size_t bad = 0;
        for (real w : m.params[l].weights.weights()) {
            ss += double(w) * double(w);
            bad += !std::isfinite(w);
        }
        os << " layer " << l << ": |w|=" << std::sqrt(ss) << " non-finite=" << bad << ';';
    }
    return os.str();
}

}  // namespace

TrainingResult run_training(const ExperimentConfig& config) {
    config.validate();
    auto [train, test] = load_datasets(config);
    if (train.size() == 0) throw DatasetError(config.dataset + ": empty training set");

    const ModelSpec spec = model_spec(config);
    Rng root(config.seed);
    Rng init_rng = root.fork(1), rewire_rng = root.fork(2), aug_rng = root.fork(3);
    TrainingResult result;
    result.model = config.init == "uniform" ? uniform_sparsity_model(spec, config.sparsity, init_rng)
                                            : erdos_renyi_model(spec, config.sparsity, init_rng);
    Model& model = result.model;
    result.initial_active = model.active_connections();

    const std::size_t spe = steps_per_epoch(train.size(), config.batch_size);
    PruneGrowSchedule schedule = config.schedule;
    schedule.end_step = config.resolved_end_step(spe);
    result.end_step = schedule.end_step;

    OptimizerState opt;
    opt.lr.initial = config.lr;
    opt.lr.drop_factor = config.lr_drop_factor;
    opt.lr.drop_epochs = config.lr_drops;
    opt.momentum = config.momentum;
    opt.weight_decay = config.weight_decay;
    opt.validate();

    const unsigned threads = config.deterministic ? 1u : config.threads;
    const bool rewires = config.strategy != GrowthStrategy::static_topology;
    std::vector<float> fill;
    if (config.augment && config.dataset != "synthetic")
        fill = black_fill(NormalizationConstants::for_dataset(config.dataset));
    AugmentationPolicy policy;
    policy.crop = train.height;

    const fs::path out_dir = config.output_dir;
    fs::create_directories(out_dir);
    write_text(out_dir / "config.txt", to_text(config));
    std::ofstream metrics(out_dir / "metrics.csv", std::ios::binary);
    std::ofstream rounds(out_dir / "rounds.csv", std::ios::binary);
    if (!metrics || !rounds) throw DatasetError("cannot write into " + out_dir.string());
    metrics << kMetricsHeader << '\n';
    rounds << kRoundsHeader << '\n';

    spdlog::info("training {} {} at sparsity {:.4f}: {} active connections, {} steps/epoch, T={}, T_end={}",
                 config.model, to_string(config.strategy), model.sparsity(), result.initial_active, spe,
                 schedule.period, schedule.end_step);

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const BatchSequence seq = batches(train, config.batch_size, config.seed, epoch);
        double loss_sum = 0;
        std::size_t correct = 0, seen = 0, epoch_rounds = 0;
        double subset_sum = 0, k_sum = 0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            ++step;
            Batch batch = seq[i];
            if (config.augment)
                augment(batch.inputs, train.channels, train.height, train.width, policy, aug_rng, fill);
            ActivationCache cache = forward(model, batch.inputs, threads);
            const TrainStepResult r = backward(model, cache, batch.labels);
            if (!std::isfinite(r.loss.loss))
                throw NumericFailure("non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                     std::to_string(step) + " (lr " + std::to_string(opt.lr.at(double(epoch))) +
                                     ");" + weight_summary(model));
            loss_sum += r.loss.loss * double(batch.labels.size());
            correct += r.loss.correct;
            seen += batch.labels.size();

            if (rewires && schedule.is_round(step)) {
                RoundReport rep = global_prune_grow(model, cache, schedule, config.strategy, step, rewire_rng);
                if (rep.total_grown() != rep.total_pruned() ||
                    model.active_connections() != result.initial_active)
                    throw std::logic_error("active connection count changed at step " + std::to_string(step));
                log_round(rounds, rep);
                ++epoch_rounds;
                subset_sum += double(rep.total_candidates());
                k_sum += double(rep.k);
                result.rounds.push_back(std::move(rep));
            } else {
                sgd_step(model, r.grads, opt, double(epoch));
            }
        }

        MetricsRecord m;
        m.epoch = epoch + 1;
        m.step = step;
        m.train_loss = loss_sum / double(seen);
        m.train_acc = double(correct) / double(seen);
        m.test_acc = evaluate(model, test, threads);
        m.lr = opt.lr.at(double(epoch));
        m.active_connections = model.active_connections();
        m.rounds_done = result.rounds.size();
        m.rounds_in_epoch = epoch_rounds;
        m.mean_subset = epoch_rounds ? subset_sum / double(epoch_rounds) : 0.0;
        m.mean_k = epoch_rounds ? k_sum / double(epoch_rounds) : 0.0;
        metrics << metrics_csv_row(m) << '\n' << std::flush;
        rounds.flush();
        spdlog::info("epoch {}: loss {:.4f} train {:.4f} test {:.4f} rounds {}", m.epoch, m.train_loss,
                     m.train_acc, m.test_acc, m.rounds_done);
        result.history.push_back(m);
    }
    result.steps = step;
    write_sidecar(out_dir / "model.bin", model, step);
    return result;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * double(values.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(values.size() - 1, lo + 1);
    return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

namespace {

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

SweepResult run_gamma_sweep(const ExperimentConfig& config, std::span<const double> gammas,
                            std::span<const std::uint64_t> seeds) {
    if (gammas.size() < 2) throw ConfigError("a gamma sweep needs at least two gammas");
    if (seeds.empty()) throw ConfigError("a gamma sweep needs at least one seed");
    for (double g : gammas)
        if (!(g > 0)) throw ConfigError("gamma must be > 0");
    SweepResult out;
    for (double g : gammas) {
        std::vector<double> accs;
        for (std::uint64_t s : seeds) {
            ExperimentConfig c = config;
            c.schedule.gamma = g;
            c.seed = s;
            c.output_dir = (fs::path(config.output_dir) / ("gamma_" + fmt_g(g) + "_seed_" + std::to_string(s))).string();
            const TrainingResult r = run_training(c);
            out.rows.push_back({g, s, r.final().test_acc});
            accs.push_back(r.final().test_acc);
        }
        SweepSummary sum;
        sum.gamma = g;
        sum.runs = accs.size();
        for (double a : accs) sum.mean += a;
        sum.mean /= double(accs.size());
        sum.p95 = percentile(accs, 95);
        out.summary.push_back(sum);
    }
    fs::create_directories(config.output_dir);
    write_text(fs::path(config.output_dir) / "sweep.csv", sweep_csv(out.rows));
    write_text(fs::path(config.output_dir) / "sweep_summary.csv", sweep_summary_csv(out.summary));
    return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string s = "gamma,seed,test_acc\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%g,%llu,%.6f\n", r.gamma, static_cast<unsigned long long>(r.seed), r.test_acc);
        s += buf;
    }
    return s;
}

std::string sweep_summary_csv(std::span<const SweepSummary> rows) {
    std::string s = "gamma,runs,mean_test_acc,p95_test_acc\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%g,%zu,%.6f,%.6f\n", r.gamma, r.runs, r.mean, r.p95);
        s += buf;
    }
    return s;
}

std::vector<FlopsRow> run_flops_report(const ExperimentConfig& config, std::span<const double> sparsities,
                                       bool write) {
    const GrowthStrategy gse = is_gse(config.strategy) ? config.strategy : GrowthStrategy::gse_uniform;
    const DataShape shape = data_shape(config);
    const std::size_t spe = steps_per_epoch(shape.train_size, config.batch_size);
    PruneGrowSchedule sched = config.schedule;
    sched.end_step = config.resolved_end_step(spe);
    auto rows = flops_report(config.model, layer_dims(model_spec(config)), sparsities, sched, config.batch_size,
                             spe * config.epochs, gse);

    // ImageNet protocol: 100 epochs of 1.28M images at batch 256.
    PruneGrowSchedule rn;
    rn.period = 100;
    rn.alpha = config.schedule.alpha;
    rn.gamma = config.schedule.gamma;
    const std::size_t rn_steps = 5005 * 100;
    rn.end_step = rn_steps;
    const auto rrows = flops_report("resnet50", resnet50_dims(), sparsities, rn, 256, rn_steps, gse);
    rows.insert(rows.end(), rrows.begin(), rrows.end());

    if (write) {
        fs::create_directories(config.output_dir);
        write_text(fs::path(config.output_dir) / "flops.csv", flops_csv(rows));
    }
    return rows;
}

}  // namespace sparsegrow
