"""
Settings module for stressnet.

All settings are stored in a simple dictionary. Each
setting should be modifiable via environment variable.
"""
import stressnet.utils.settings as s

# Initialize the global configuration once.
CFG = s.Configuration(
    "stressnet",
    node={
        "verbosity": {
            "desc": "The verbosity level of the logger. Range: 0-5",
            "default": 0
        },
        "debug": {
            "desc": "Should debug logging be enabled?",
            "default": False
        },
        "seed": {
            "desc": "Seed of every random number generator.",
            "default": 0
        },
        "jobs": {
            "desc": "Worker processes for trial generation, 0 uses all CPUs.",
            "default": 1
        },
    }
)

CFG["crop"] = {
    "x0": {
        "desc": "Left edge of the face crop, null centres it.",
        "default": None
    },
    "y0": {
        "desc": "Top edge of the face crop, null centres it.",
        "default": None
    },
    "width": {
        "desc": "Crop width in pixels, null keeps the full width.",
        "default": None
    },
    "height": {
        "desc": "Crop height in pixels, null keeps the full height.",
        "default": None
    },
}

CFG["emission"] = {
    "derivative": {
        "desc": "Take the temporal derivative of the counts.",
        "default": True
    },
    "signlog": {
        "desc": "Compress the derivative with sign(x) * ln(1 + |x|).",
        "default": True
    },
    "gaussian": {
        "desc": "Apply the separable spatio-temporal Gaussian.",
        "default": True
    },
    "sigma_spatial": {
        "desc": "Spatial Gaussian sigma in pixels.",
        "default": 3.0
    },
    "sigma_temporal": {
        "desc": "Temporal Gaussian sigma in frames.",
        "default": 4.0
    },
}

CFG["peaks"] = {
    "ecg_mode": {
        "desc": "ECG threshold mode: absolute or adaptive.",
        "default": "adaptive"
    },
    "ecg_value": {
        "desc": "ECG threshold (level, or k for mean + k * std).",
        "default": 2.0
    },
    "dzdt_mode": {
        "desc": "dZ/dt threshold mode: absolute or adaptive.",
        "default": "adaptive"
    },
    "dzdt_value": {
        "desc": "dZ/dt threshold (level, or k for mean + k * std).",
        "default": 2.0
    },
    "min_distance_s": {
        "desc": "Minimum distance between two peaks in seconds.",
        "default": 0.3
    },
}

CFG["isti"] = {
    "max_lag_s": {
        "desc": "Longest accepted R-peak to dZ/dt peak delay in seconds.",
        "default": 0.5
    },
    "max_ms": {
        "desc": "ISTI value mapped to 1.0 by normalisation.",
        "default": 300.0
    },
}

CFG["hr"] = {
    "window_s": {
        "desc": "HR/HRV window length in seconds.",
        "default": 15.0
    },
    "stride_s": {
        "desc": "HR/HRV window stride in seconds.",
        "default": 1.0
    },
}

CFG["breathing"] = {
    "low_hz": {
        "desc": "Lower edge of the breathing band.",
        "default": 0.1
    },
    "high_hz": {
        "desc": "Upper edge of the breathing band.",
        "default": 0.85
    },
}

CFG["roi"] = {
    "x0": {
        "desc": "Left edge of the nostril region.",
        "default": 12
    },
    "y0": {
        "desc": "Top edge of the nostril region.",
        "default": 20
    },
    "width": {
        "desc": "Width of the nostril region.",
        "default": 8
    },
    "height": {
        "desc": "Height of the nostril region.",
        "default": 4
    },
}

CFG["model"] = {
    "channels": {
        "desc": "Output channels of the backbone convolutions.",
        "default": [8, 16, 32]
    },
    "hidden": {
        "desc": "LSTM hidden size.",
        "default": 32
    },
    "lstm_layers": {
        "desc": "Number of stacked LSTM layers.",
        "default": 1
    },
    "head_hidden": {
        "desc": "Width of the detection head's hidden layer.",
        "default": 64
    },
    "n_bins": {
        "desc": "Number of ISTI bins of the detection head.",
        "default": 33
    },
}

CFG["train"] = {
    "lr_backbone": {
        "desc": "Initial learning rate of the backbone.",
        "default": 0.001
    },
    "lr_head": {
        "desc": "Initial learning rate of the LSTM and the head.",
        "default": 0.01
    },
    "decay_factor": {
        "desc": "Learning-rate decay factor.",
        "default": 0.1
    },
    "decay_period": {
        "desc": "Epochs between two learning-rate decays.",
        "default": 10
    },
    "epochs": {
        "desc": "Training epochs.",
        "default": 30
    },
    "batch_frames": {
        "desc": "Frames per SGD batch.",
        "default": 500
    },
    "alpha": {
        "desc": "Weight of the regression term of the loss.",
        "default": 1.0
    },
    "seq_seconds": {
        "desc": "Length of one LSTM sequence in seconds.",
        "default": 1.0
    },
    "loss": {
        "desc": "Binned classification loss: ce or bce.",
        "default": "ce"
    },
}

CFG["stress"] = {
    "n_in": {
        "desc": "Points the trial signal is resampled to.",
        "default": 128
    },
    "hidden": {
        "desc": "Hidden layer widths of the stress classifier.",
        "default": [64, 16]
    },
    "lr": {
        "desc": "Learning rate of the stress classifier.",
        "default": 0.1
    },
    "epochs": {
        "desc": "Full-batch epochs of the stress classifier.",
        "default": 2000
    },
}

CFG["synth"] = {
    "fps": {
        "desc": "Frame rate of generated clips.",
        "default": 15.0
    },
    "width": {
        "desc": "Width of generated clips.",
        "default": 32
    },
    "height": {
        "desc": "Height of generated clips.",
        "default": 32
    },
    "base_s": {
        "desc": "Length of the base phase in seconds.",
        "default": 10.0
    },
    "prep_s": {
        "desc": "Length of the prep phase in seconds.",
        "default": 10.0
    },
    "immersion_s": {
        "desc": "Length of the immersion phase in seconds.",
        "default": 20.0
    },
    "recovery_s": {
        "desc": "Length of the recovery phase in seconds.",
        "default": 10.0
    },
}

s.setup_config(CFG)
