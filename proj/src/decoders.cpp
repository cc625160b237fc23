#include "nndbench/decoders.hpp"

#include <fstream>
#include <memory>

#include "nndbench/errors.hpp"
#include "nndbench/serialize.hpp"

namespace nndbench {

namespace {

constexpr std::uint32_t kModelMagic = 0x4d444e4e;  // "NNDM"
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

ArchKind arch_from_string(const std::string& name) {
  if (name == "mlp") return ArchKind::kMlp;
  if (name == "cnn") return ArchKind::kCnn;
  if (name == "rnn") return ArchKind::kRnn;
  throw ConfigError("unknown architecture '" + name + "' (expected mlp, cnn or rnn)");
}

std::string to_string(ArchKind kind) {
  switch (kind) {
    case ArchKind::kMlp: return "mlp";
    case ArchKind::kCnn: return "cnn";
    case ArchKind::kRnn: return "rnn";
  }
  return "?";
}

void ArchitectureSpec::validate() const {
  if (k < 1 || n < k) throw ConfigError("architecture: need 1 <= K <= N");
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ConfigError("architecture: dropout probability must be in [0, 1)");
  }
  switch (kind) {
    case ArchKind::kMlp:
      for (int w : mlp_hidden) {
        if (w < 1) throw ConfigError("architecture: MLP hidden widths must be positive");
      }
      break;
    case ArchKind::kCnn:
      if (cnn_channels.size() != 3) {
        throw ConfigError("architecture: CNN takes exactly three channel counts");
      }
      for (int c : cnn_channels) {
        if (c < 1) throw ConfigError("architecture: CNN channel counts must be positive");
      }
      // three halving pools plus a final kernel of N/8
      if (n % 8 != 0) throw ConfigError("architecture: CNN requires N divisible by 8");
      break;
    case ArchKind::kRnn:
      if (rnn_hidden < 1) throw ConfigError("architecture: LSTM hidden size must be positive");
      break;
  }
}

ParamCount param_count(const ArchitectureSpec& spec) {
  spec.validate();
  std::int64_t weights = 0;
  std::int64_t biases = 0;
  switch (spec.kind) {
    case ArchKind::kMlp: {
      std::int64_t prev = spec.n;
      for (int w : spec.mlp_hidden) {
        weights += prev * w;
        biases += w;
        prev = w;
      }
      weights += prev * spec.k;
      biases += spec.k;
      break;
    }
    case ArchKind::kCnn: {
      std::int64_t prev = 1;
      for (int c : spec.cnn_channels) {
        weights += 3 * prev * c;
        biases += c;
        prev = c;
      }
      weights += (spec.n / 8) * prev * spec.k;
      biases += spec.k;
      break;
    }
    case ArchKind::kRnn: {
      const std::int64_t h = spec.rnn_hidden;
      weights += 4 * h * (1 + h);  // stacked input + recurrent gate matrices
      biases += 4 * h;
      weights += h * spec.k;  // readout
      biases += spec.k;
      break;
    }
  }
  return ParamCount{weights, weights + biases};
}

template <typename T>
Network<T> build_network(const ArchitectureSpec& spec, RngStream& init_rng) {
  spec.validate();
  Network<T> net;
  switch (spec.kind) {
    case ArchKind::kMlp: {
      std::int64_t prev = spec.n;
      for (int w : spec.mlp_hidden) {
        net.add(std::make_unique<Dense<T>>(prev, w));
        net.add(std::make_unique<Relu<T>>());
        net.add(std::make_unique<Dropout<T>>(spec.dropout_p));
        prev = w;
      }
      net.add(std::make_unique<Dense<T>>(prev, spec.k));
      net.add(std::make_unique<Sigmoid<T>>());
      break;
    }
    case ArchKind::kCnn: {
      net.add(std::make_unique<Reshape<T>>(std::vector<std::int64_t>{spec.n, 1}));
      std::int64_t prev = 1;
      for (int c : spec.cnn_channels) {
        net.add(std::make_unique<Conv1D<T>>(3, prev, c, Conv1D<T>::Padding::kSame));
        net.add(std::make_unique<Relu<T>>());
        net.add(std::make_unique<MaxPool1D<T>>());
        net.add(std::make_unique<Dropout<T>>(spec.dropout_p));
        prev = c;
      }
      net.add(std::make_unique<Conv1D<T>>(spec.n / 8, prev, spec.k, Conv1D<T>::Padding::kValid));
      net.add(std::make_unique<Flatten<T>>());  // squeeze [B, 1, K] -> [B, K]
      net.add(std::make_unique<Sigmoid<T>>());
      break;
    }
    case ArchKind::kRnn: {
      net.add(std::make_unique<Reshape<T>>(std::vector<std::int64_t>{spec.n, 1}));
      net.add(std::make_unique<Lstm<T>>(1, spec.rnn_hidden));
      net.add(std::make_unique<Dropout<T>>(spec.dropout_p));
      net.add(std::make_unique<Dense<T>>(spec.rnn_hidden, spec.k));
      net.add(std::make_unique<Sigmoid<T>>());
      break;
    }
  }
  net.init_params(init_rng);
  return net;
}

template Network<float> build_network<float>(const ArchitectureSpec&, RngStream&);
template Network<double> build_network<double>(const ArchitectureSpec&, RngStream&);

NetworkModel build(const ArchitectureSpec& spec, RngStream& init_rng) {
  NetworkModel model;
  model.spec = spec;
  model.net = build_network<float>(spec, init_rng);
  return model;
}

BitVector NetworkModel::decode(std::span<const double> y) {
  if (static_cast<int>(y.size()) != spec.n) {
    throw ArgumentError("decode: received vector has length " + std::to_string(y.size()) +
                        ", expected " + std::to_string(spec.n));
  }
  Tensor<float> input({1, spec.n});
  for (int i = 0; i < spec.n; ++i) input[i] = static_cast<float>(y[static_cast<std::size_t>(i)]);
  const Tensor<float> probs = net.forward(input, Mode::kInfer);
  BitVector bits(spec.k);
  for (int i = 0; i < spec.k; ++i) bits.set(i, hard_bit(probs[i]));
  return bits;
}

std::vector<BitVector> NetworkModel::decode_batch(const Tensor<float>& inputs) {
  const Tensor<float> probs = net.forward(inputs, Mode::kInfer);
  const std::int64_t batch = probs.dim(0);
  std::vector<BitVector> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (std::int64_t b = 0; b < batch; ++b) {
    BitVector bits(spec.k);
    for (int i = 0; i < spec.k; ++i) bits.set(i, hard_bit(probs.at2(b, i)));
    out.push_back(std::move(bits));
  }
  return out;
}

void NetworkModel::save(std::ostream& os) {
  io::write_pod<std::uint32_t>(os, kModelMagic);
  io::write_pod<std::uint32_t>(os, kModelVersion);
  io::write_string(os, to_string(spec.kind));
  io::write_pod<std::int32_t>(os, spec.n);
  io::write_pod<std::int32_t>(os, spec.k);
  io::write_vector<int>(os, spec.mlp_hidden);
  io::write_vector<int>(os, spec.cnn_channels);
  io::write_pod<std::int32_t>(os, spec.rnn_hidden);
  io::write_pod<double>(os, spec.dropout_p);
  io::write_pod<double>(os, trained_p);
  io::write_pod<std::uint64_t>(os, subset_seed);
  io::write_pod<double>(os, rho_t_db);
  io::write_pod<std::int64_t>(os, trained_steps);
  net.save_params(os);
}

void NetworkModel::save_file(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  save(os);
}

NetworkModel NetworkModel::load(std::istream& is) {
  if (io::read_pod<std::uint32_t>(is) != kModelMagic) {
    throw ConfigError("model file: bad magic");
  }
  if (io::read_pod<std::uint32_t>(is) != kModelVersion) {
    throw ConfigError("model file: unsupported version");
  }
  ArchitectureSpec spec;
  spec.kind = arch_from_string(io::read_string(is));
  spec.n = io::read_pod<std::int32_t>(is);
  spec.k = io::read_pod<std::int32_t>(is);
  spec.mlp_hidden = io::read_vector<int>(is);
  spec.cnn_channels = io::read_vector<int>(is);
  spec.rnn_hidden = io::read_pod<std::int32_t>(is);
  spec.dropout_p = io::read_pod<double>(is);

  RngStream scratch(0);
  NetworkModel model = build(spec, scratch);
  model.trained_p = io::read_pod<double>(is);
  model.subset_seed = io::read_pod<std::uint64_t>(is);
  model.rho_t_db = io::read_pod<double>(is);
  model.trained_steps = io::read_pod<std::int64_t>(is);
  model.net.load_params(is);
  return model;
}

NetworkModel NetworkModel::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  return load(is);
}

}  // namespace nndbench
