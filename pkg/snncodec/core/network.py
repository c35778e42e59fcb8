# snncodec/core/network.py

import logging

import numpy as np

from snncodec.core.data import batches
from snncodec.core.encoder import encode, spike_count_readout, temporal_shuffle
from snncodec.core.neuron import lif_run
from snncodec.core.optim import SGD
from snncodec.core.tensor import (
    SpikeBackward, Tensor, avg_pool2d, backward, channel_view, conv2d, linear,
    mean, no_grad, reshape, softmax_cross_entropy,
)
from snncodec.errors import ConfigError, DimensionError, TrainingError
from snncodec.models import EncoderParams, LifParams, NeuronVariant

logger = logging.getLogger(__name__)

# ===========================
# Configuration / Tunables
# ===========================

KERNEL = 3
PAD = 1
POOL = 2
DEFAULT_EPOCHS = 5
DEFAULT_LR = 0.05
DEFAULT_MOMENTUM = 0.9
DEFAULT_BATCH_SIZE = 32
EVAL_BATCH_SIZE = 256
CALIBRATION_SIZE = 32
SCALE_EXPONENTS = (-8.0, 8.0)  # log2 range searched for each layer's weight scale
CALIBRATION_STEPS = 20

# Layers whose output drives a LIF population, first to last.
SPIKING_LAYERS = ('conv1', 'conv2', 'fc')

# Layer order of the classifier; also the checkpoint block order.
PARAM_ORDER = (
    'front.weight', 'front.bias', 'encoder.a',
    'conv1.weight', 'conv1.bias', 'lif1.decay_t', 'lif1.beta_t',
    'conv2.weight', 'conv2.bias', 'lif2.decay_t', 'lif2.beta_t',
    'fc.weight', 'fc.bias', 'lif3.decay_t', 'lif3.beta_t',
    'readout.weight', 'readout.bias',
)


def _uniform(rng, shape, fan_in, gain):
    """U(-b, b) with b = gain * sqrt(3 / fan_in), i.e. variance gain^2 / fan_in."""
    bound = gain * np.sqrt(3.0 / fan_in)
    return Tensor.parameter(rng.uniform(-bound, bound, size=shape))


def _frames(train):
    """[T, B, ...] -> [T*B, ...]; stateless layers run on every step at once."""
    return reshape(train, (train.shape[0] * train.shape[1],) + train.shape[2:])


def _unframes(frames, time_steps):
    return reshape(frames, (time_steps, frames.shape[0] // time_steps) + frames.shape[1:])


class Model:
    """[front conv] -> encoder -> conv/LIF/pool x2 -> linear/LIF -> averaged linear readout."""

    def __init__(self, cfg, params, encoder, lifs):
        self.cfg = cfg
        self.params = params
        self.encoder = encoder
        self.lifs = lifs
        self.epoch = 0
        self.history = []

    def named_parameters(self):
        """Every persisted tensor, trainable or frozen, in checkpoint order."""
        return {name: self.params[name] for name in PARAM_ORDER if name in self.params}

    def parameters(self):
        return [p for p in self.named_parameters().values() if p.requires_grad]

    def spike_backward(self):
        if self.cfg.flags.sg:
            return SpikeBackward.surrogate(self.cfg.surrogate_alpha)
        return SpikeBackward.exact_zero()

    def _check_images(self, images):
        expected = (self.cfg.in_channels, self.cfg.height, self.cfg.width)
        if images.ndim != 4 or images.shape[1:] != expected:
            raise DimensionError(f"images {images.shape} do not match [B, {expected[0]}, {expected[1]}, {expected[2]}]")

    def encode(self, images, bw=None, rng=None):
        """Spike train (or replicated features in direct mode) entering the network, [T, B, C, H, W]."""
        self._check_images(images)
        bw = bw or self.spike_backward()
        x = images
        if self.cfg.flags.lc:
            x = conv2d(x, self.params['front.weight'], 1, PAD) + channel_view(self.params['front.bias'], 4)
        return encode(x, self.encoder, self.cfg.mode, bw, rng=rng)

    def input_current(self, index, spikes):
        """Current [T, B, ...] into LIF layer `index` (0-2) from the previous stage's output."""
        p = self.params
        name = SPIKING_LAYERS[index]
        x = _frames(spikes)
        if index > 0:
            x = avg_pool2d(x, POOL)
        if name == 'fc':
            x = linear(reshape(x, (x.shape[0], -1)), p['fc.weight'], p['fc.bias'])
        else:
            x = conv2d(x, p[f'{name}.weight'], 1, PAD) + channel_view(p[f'{name}.bias'], 4)
        return _unframes(x, self.cfg.time_steps)

    def forward(self, images, bw=None, shuffle_seed=None, permutation=None, rng=None, trace=None):
        """
        Class logits [B, K]: the readout's per-step output averaged over T.

        A dict passed as `trace` receives the encoder output and each LIF layer's spikes.
        """
        bw = bw or self.spike_backward()
        p = self.params
        s = self.encode(images, bw, rng)
        if shuffle_seed is not None or permutation is not None:
            s = temporal_shuffle(s, shuffle_seed, permutation)
        if trace is not None:
            trace['encoder'] = s

        for index, lif in enumerate(self.lifs):
            s = lif_run(self.input_current(index, s), lif, bw)
            if trace is not None:
                trace[f'lif{index + 1}'] = s

        out = linear(_frames(s), p['readout.weight'], p['readout.bias'])
        return mean(_unframes(out, self.cfg.time_steps), axis=0)


def _spatial_after_pools(cfg):
    h, w = cfg.height, cfg.width
    for _ in range(2):
        h, w = h // POOL, w // POOL
    if h < 1 or w < 1:
        raise ConfigError(f"{cfg.height}x{cfg.width} images are too small for two {POOL}x pools")
    return h, w


def build_model(cfg, calibration_images=None, calibrated=True):
    """
    Deterministic initial parameters from cfg.seed.

    Unless `calibrated` is false, the weights feeding each LIF layer are then
    rescaled by `calibrate` on `calibration_images`, or on seeded uniform
    noise images when none are given.
    """
    rng = np.random.default_rng(cfg.seed)
    gain = cfg.init_gain
    enc_channels = cfg.encoder_channels
    c1, c2 = cfg.conv_channels
    h, w = _spatial_after_pools(cfg)
    params = {}

    if cfg.flags.lc:
        fan_in = cfg.in_channels * KERNEL * KERNEL
        params['front.weight'] = _uniform(rng, (cfg.front_channels, cfg.in_channels, KERNEL, KERNEL), fan_in, 1.0)
        params['front.bias'] = Tensor.parameter(np.zeros(cfg.front_channels))

    encoder = EncoderParams.create(enc_channels, cfg.time_steps, cfg.theta0,
                                   lt_enabled=cfg.flags.lt, bernoulli_rate=cfg.rate_bernoulli)
    params['encoder.a'] = encoder.a

    params['conv1.weight'] = _uniform(rng, (c1, enc_channels, KERNEL, KERNEL), enc_channels * KERNEL * KERNEL, gain)
    params['conv1.bias'] = Tensor.parameter(np.zeros(c1))
    params['conv2.weight'] = _uniform(rng, (c2, c1, KERNEL, KERNEL), c1 * KERNEL * KERNEL, gain)
    params['conv2.bias'] = Tensor.parameter(np.zeros(c2))
    flat = c2 * h * w
    params['fc.weight'] = _uniform(rng, (cfg.hidden, flat), flat, gain)
    params['fc.bias'] = Tensor.parameter(np.zeros(cfg.hidden))
    params['readout.weight'] = _uniform(rng, (cfg.class_count, cfg.hidden), cfg.hidden, 1.0)
    params['readout.bias'] = Tensor.parameter(np.zeros(cfg.class_count))

    lifs = []
    for index, channels in enumerate((c1, c2, cfg.hidden), start=1):
        if cfg.neuron_variant is NeuronVariant.LEARNABLE:
            lif = LifParams.learnable_for(channels, cfg.time_steps, cfg.decay, cfg.v_th)
            params[f'lif{index}.decay_t'] = lif.decay_t
            params[f'lif{index}.beta_t'] = lif.beta_t
        else:
            lif = LifParams.standard(cfg.time_steps, cfg.decay, cfg.v_th)
        lifs.append(lif)

    model = Model(cfg, params, encoder, lifs)
    if calibrated:
        if calibration_images is None:
            calibration_images = rng.random((CALIBRATION_SIZE, cfg.in_channels, cfg.height, cfg.width))
        calibrate(model, calibration_images)
    logger.debug("model built", extra={'mode': cfg.mode.value, 'flags': cfg.flags.label(cfg.mode.value.upper())})
    return model


def _scale_exponent(current, lif, bw, target):
    """Bisect log2 of the factor on `current` that brings the layer's firing rate to `target`."""
    lo, hi = SCALE_EXPONENTS
    for _ in range(CALIBRATION_STEPS):
        mid = 0.5 * (lo + hi)
        if lif_run(Tensor(current * 2.0 ** mid), lif, bw).data.mean() < target:
            lo = mid
        else:
            hi = mid
    return hi


def calibrate(model, images, target=None):
    """
    Scale the weights feeding each LIF layer, first to last, so that layer fires
    at `target` (default cfg.target_rate) on `images`.

    Sparse binary inputs and the (1 - L) input factor leave a fan-in scaled
    init silent after a layer or two. The biases must still be zero.
    Returns the firing rate reached per layer.
    """
    target = model.cfg.target_rate if target is None else target
    bw = SpikeBackward.exact_zero()
    rates = {}
    with no_grad():
        s = model.encode(Tensor(images), bw, np.random.default_rng(model.cfg.seed))
        for index, lif in enumerate(model.lifs):
            name = f'lif{index + 1}'
            current = model.input_current(index, s).data
            if current.any():
                exponent = _scale_exponent(current, lif, bw, target)
                model.params[f'{SPIKING_LAYERS[index]}.weight'].data *= 2.0 ** exponent
            else:
                logger.warning("no input reaches the layer; weights left unscaled", extra={'layer': name})
            s = lif_run(model.input_current(index, s), lif, bw)
            rates[name] = float(s.data.mean())
    logger.debug("firing calibrated", extra=rates)
    return rates


def firing_rates(model, images, rng=None):
    """Mean output of the encoder and of each LIF layer on `images`."""
    trace = {}
    rng = rng or np.random.default_rng(model.cfg.seed)
    with no_grad():
        model.forward(Tensor(images), rng=rng, trace=trace)
    return {name: float(s.data.mean()) for name, s in trace.items()}


def forward(model, images, bw=None, **kwargs):
    return model.forward(images, bw, **kwargs)


def predict(model, dataset, batch_size=EVAL_BATCH_SIZE, shuffle_seed=None, permutation=None):
    """Logits for every sample, in dataset order."""
    rng = np.random.default_rng(model.cfg.seed)
    rows = []
    with no_grad():
        for images, _ in batches(dataset, batch_size):
            logits = model.forward(images, shuffle_seed=shuffle_seed, permutation=permutation, rng=rng)
            rows.append(logits.data)
    return np.concatenate(rows)


def accuracy_from_logits(logits, labels):
    # argmax returns the first maximum: ties go to the lowest class index
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(labels)))


def evaluate(model, dataset, batch_size=EVAL_BATCH_SIZE, shuffle_seed=None, permutation=None):
    return accuracy_from_logits(predict(model, dataset, batch_size, shuffle_seed, permutation), dataset.labels)


def encoder_count_change(model, dataset, shuffle_seed, batch_size=EVAL_BATCH_SIZE):
    """Largest change of any per-neuron encoder spike count when the train is shuffled over time."""
    rng = np.random.default_rng(model.cfg.seed)
    worst = 0.0
    with no_grad():
        for images, _ in batches(dataset, batch_size):
            train = model.encode(images, rng=rng)
            shuffled = temporal_shuffle(train, shuffle_seed)
            change = spike_count_readout(shuffled).data - spike_count_readout(train).data
            worst = max(worst, float(np.abs(change).max()))
    return worst


def check_compatible(cfg, dataset):
    if dataset.class_count != cfg.class_count:
        raise ConfigError(f"dataset has {dataset.class_count} classes, model {cfg.class_count}")
    if dataset.image_shape != (cfg.in_channels, cfg.height, cfg.width):
        raise ConfigError(f"dataset images {dataset.image_shape} do not fit the model")


class Trainer:
    def __init__(self, model, train_ds, eval_ds, epochs=DEFAULT_EPOCHS, lr=DEFAULT_LR, seed=0,
                 momentum=DEFAULT_MOMENTUM, batch_size=DEFAULT_BATCH_SIZE, logging_enabled=True):
        check_compatible(model.cfg, train_ds)
        check_compatible(model.cfg, eval_ds)
        self.model = model
        self.train_ds = train_ds
        self.eval_ds = eval_ds
        self.epochs = epochs
        self.seed = seed
        self.batch_size = batch_size
        self.optimizer = SGD(model.parameters(), lr=lr, momentum=momentum)
        self.logging_enabled = logging_enabled
        self.log = []
        self.history = []

    def log_event(self, message, importance='normal', event_type=None, details=None):
        if not self.logging_enabled:
            return
        self.log.append({
            'epoch': self.model.epoch,
            'message': message,
            'importance': importance,
            'event_type': event_type,
            'details': details,
        })

    def run(self):
        from snncodec.core.checkpoint import Checkpoint

        rng = np.random.default_rng(self.seed)
        self.log_event("Training started", importance='info', event_type='START',
                       details={'epochs': self.epochs, 'samples': len(self.train_ds)})
        for _ in range(self.epochs):
            epoch = self.model.epoch + 1
            total, seen = 0.0, 0
            for index, (images, labels) in enumerate(batches(self.train_ds, self.batch_size, self.seed * 1000 + epoch)):
                self.optimizer.zero_grad()
                loss = softmax_cross_entropy(self.model.forward(images, rng=rng), labels)
                value = loss.item()
                if not np.isfinite(value):
                    self.log_event("Non-finite loss", importance='error', event_type='DIVERGED')
                    raise TrainingError("non-finite loss", epoch=epoch, batch=index)
                backward(loss)
                self.optimizer.step()
                total += value * len(labels)
                seen += len(labels)

            self.model.epoch = epoch
            entry = {'epoch': epoch, 'train_loss': total / seen, 'eval_accuracy': evaluate(self.model, self.eval_ds)}
            self.history.append(entry)
            self.model.history.append(entry)
            self.log_event(f"Epoch {epoch} complete", event_type='EPOCH', details=entry)
            logger.info("epoch complete", extra=entry)

        self.log_event("Training finished", importance='final', event_type='END')
        return Checkpoint.from_model(self.model), list(self.history)

    def get_results(self):
        return {'log': self.log, 'history': self.history, 'epoch': self.model.epoch}


def train(model, train_ds, eval_ds, epochs=DEFAULT_EPOCHS, lr=DEFAULT_LR, seed=0,
          momentum=DEFAULT_MOMENTUM, batch_size=DEFAULT_BATCH_SIZE):
    """SGD+momentum on softmax cross-entropy; returns (Checkpoint, metric history)."""
    return Trainer(model, train_ds, eval_ds, epochs, lr, seed, momentum, batch_size).run()
