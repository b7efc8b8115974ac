#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "grc/compressor.hpp"
#include "grc/corpus.hpp"
#include "grc/decompressor.hpp"

namespace {

// Plain integer with optional K/M/G suffix (powers of 1024).
std::uint64_t parse_size(const std::string& s) {
  std::string digits = s;
  std::uint64_t mul = 1;
  if (!s.empty()) {
    switch (s.back()) {
      case 'K': case 'k': mul = 1ull << 10; break;
      case 'M': case 'm': mul = 1ull << 20; break;
      case 'G': case 'g': mul = 1ull << 30; break;
      default: break;
    }
    if (mul != 1) digits = s.substr(0, s.size() - 1);
  }
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](unsigned char c) { return std::isdigit(c); }))
    throw std::invalid_argument("bad size value: " + s);
  std::uint64_t v;
  try {
    v = std::stoull(digits);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("size out of range: " + s);
  }
  if (mul != 1 && v > std::numeric_limits<std::uint64_t>::max() / mul)
    throw std::invalid_argument("size out of range: " + s);
  return v * mul;
}

grc::Mode parse_mode(const std::string& s) {
  if (s == "plain") return grc::Mode::plain;
  if (s == "freq") return grc::Mode::freq;
  if (s == "lossy") return grc::Mode::lossy;
  if (s == "block") return grc::Mode::block;
  throw std::invalid_argument("unknown mode: " + s);
}

struct CommonArgs {
  std::string mode = "plain";
  std::string k = "65536";
  double eps = 0.3;
  std::string ell = "1M";
  double alpha = 1.0;
  bool stats = false;
  std::string input = "-";
  std::string output = "-";
};

grc::StrategyConfig make_config(const CommonArgs& a) {
  grc::StrategyConfig cfg;
  cfg.mode = parse_mode(a.mode);
  if (cfg.mode == grc::Mode::freq) {
    cfg.k = parse_size(a.k);
    if (!(a.eps > 0.0 && a.eps < 100.0))
      throw std::invalid_argument("eps must be a percentage in (0, 100)");
    cfg.eps_ppm = static_cast<std::uint32_t>(std::llround(a.eps * 10000.0));
  }
  if (cfg.mode == grc::Mode::lossy || cfg.mode == grc::Mode::block)
    cfg.ell = parse_size(a.ell);
  cfg.validate();
  return cfg;
}

// Streams resolve lazily so '-' maps to the standard channels untouched.
struct Channels {
  std::ifstream fin;
  std::ofstream fout;

  std::istream& in(const std::string& path) {
    if (path == "-") return std::cin;
    fin.open(path, std::ios::binary);
    if (!fin) throw grc::IoError("cannot open input: " + path);
    return fin;
  }

  std::ostream& out(const std::string& path) {
    if (path == "-") return std::cout;
    fout.open(path, std::ios::binary | std::ios::trunc);
    if (!fout) throw grc::IoError("cannot open output: " + path);
    return fout;
  }
};

void print_stats(std::uint64_t bytes_in, std::uint64_t bytes_out, std::uint64_t segments,
                 std::uint64_t rules_created, std::uint64_t rules_live_peak, double seconds) {
  nlohmann::json j;
  j["bytes_in"] = bytes_in;
  j["bytes_out"] = bytes_out;
  j["cr_percent"] = bytes_in ? 100.0 * static_cast<double>(bytes_out) / static_cast<double>(bytes_in) : 0.0;
  j["segments"] = segments;
  j["rules_created"] = rules_created;
  j["rules_live_peak"] = rules_live_peak;
  j["seconds"] = seconds;
  std::cerr << j.dump() << "\n";
}

int cmd_compress(const CommonArgs& a) {
  grc::StrategyConfig cfg = make_config(a);
  if (!(a.alpha > 0.0 && a.alpha <= 1.0))
    throw std::invalid_argument("alpha must be in (0, 1]");
  Channels ch;
  std::istream& in = ch.in(a.input);
  std::ostream& out = ch.out(a.output);
  auto t0 = std::chrono::steady_clock::now();
  grc::Compressor comp(cfg, a.alpha);
  grc::CompressStats st = comp.run(in, out);
  if (a.output != "-") grc::patch_original_length(out, st.bytes_in);
  out.flush();
  if (!out) throw grc::IoError("write failure");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (a.stats)
    print_stats(st.bytes_in, st.bytes_out, st.segments, st.rules_created, st.rules_live_peak, secs);
  return 0;
}

int cmd_decompress(const CommonArgs& a) {
  if (!(a.alpha > 0.0 && a.alpha <= 1.0))
    throw std::invalid_argument("alpha must be in (0, 1]");
  Channels ch;
  std::istream& in = ch.in(a.input);
  std::ostream& out = ch.out(a.output);
  auto t0 = std::chrono::steady_clock::now();
  grc::Decompressor dec(a.alpha);
  grc::DecompressStats st = dec.run(in, &out);
  out.flush();
  if (!out) throw grc::IoError("write failure");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (a.stats)
    print_stats(st.bytes_in, st.bytes_out, st.segments, st.rules_created, st.rules_live_peak, secs);
  return 0;
}

int cmd_stat(const std::string& input) {
  Channels ch;
  std::istream& in = ch.in(input);
  grc::Decompressor dec;
  grc::DecompressStats st = dec.run(in, nullptr);
  const grc::ContainerHeader& h = dec.header();
  std::cout << "mode=" << grc::mode_name(h.mode) << "\n"
            << "sigma=" << h.sigma << "\n"
            << "k=" << h.k << "\n"
            << "eps_percent=" << (static_cast<double>(h.eps_ppm) / 10000.0) << "\n"
            << "ell=" << h.ell << "\n"
            << "original_length=" << h.original_length << "\n"
            << "container_bytes=" << st.bytes_in << "\n"
            << "segments=" << st.segments << "\n"
            << "rules_created=" << st.rules_created << "\n"
            << "rules_live_peak=" << st.rules_live_peak << "\n"
            << "recovered_length=" << st.bytes_out << "\n";
  return 0;
}

struct GenArgs {
  std::uint64_t seed = 1;
  std::string base_size = "1M";
  std::uint64_t copies = 1;
  double mutation_rate = 0.0;
  std::string output = "-";
};

int cmd_gen(const GenArgs& g) {
  Channels ch;
  std::ostream& out = ch.out(g.output);
  grc::gen_corpus(out, g.seed, parse_size(g.base_size), g.copies, g.mutation_rate);
  out.flush();
  if (!out) throw grc::IoError("write failure");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  std::cin.tie(nullptr);

  CLI::App app{"grc: streaming grammar compressor"};
  app.require_subcommand(1);

  CommonArgs ca;
  GenArgs ga;
  std::string stat_input = "-";

  CLI::App* c = app.add_subcommand("compress", "compress bytes into a grammar container");
  c->add_option("-m,--mode", ca.mode, "plain | freq | lossy | block")->capture_default_str();
  c->add_option("--k", ca.k, "freq: max live rules (K/M/G ok)")->capture_default_str();
  c->add_option("--eps", ca.eps, "freq: vacancy percentage")->capture_default_str();
  c->add_option("--ell", ca.ell, "lossy/block: interval bytes (K/M/G ok)")->capture_default_str();
  c->add_option("--alpha", ca.alpha, "reverse-index load factor")->capture_default_str();
  c->add_flag("--stats", ca.stats, "print a stats record to stderr");
  c->add_option("input", ca.input, "input file or '-'")->capture_default_str();
  c->add_option("output", ca.output, "output file or '-'")->capture_default_str();

  CLI::App* d = app.add_subcommand("decompress", "expand a grammar container");
  d->add_option("--alpha", ca.alpha, "reverse-index load factor")->capture_default_str();
  d->add_flag("--stats", ca.stats, "print a stats record to stderr");
  d->add_option("input", ca.input, "input file or '-'")->capture_default_str();
  d->add_option("output", ca.output, "output file or '-'")->capture_default_str();

  CLI::App* s = app.add_subcommand("stat", "validate a container and dump header and replay counts");
  s->add_option("input", stat_input, "input file or '-'")->capture_default_str();

  CLI::App* g = app.add_subcommand("gen", "emit a deterministic repetitive test corpus");
  g->add_option("--seed", ga.seed, "RNG seed")->capture_default_str();
  g->add_option("--base-size", ga.base_size, "base string length (K/M/G ok)")->capture_default_str();
  g->add_option("--copies", ga.copies, "number of mutated copies")->capture_default_str();
  g->add_option("--mutation-rate", ga.mutation_rate, "per-letter substitution probability")
      ->capture_default_str();
  g->add_option("output", ga.output, "output file or '-'")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (c->parsed()) return cmd_compress(ca);
    if (d->parsed()) return cmd_decompress(ca);
    if (s->parsed()) return cmd_stat(stat_input);
    if (g->parsed()) return cmd_gen(ga);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const grc::CorruptStreamError& e) {
    std::cerr << "error: corrupt stream: " << e.what() << "\n";
    return 3;
  } catch (const grc::IntegrityError& e) {
    std::cerr << "error: integrity: " << e.what() << "\n";
    return 4;
  } catch (const grc::IoError& e) {
    std::cerr << "error: I/O: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
}
