#
#
"""
项目配置文件
包含草图、模型、训练、推理、评估、抽象化和渲染设置
"""

# 草图数据设置
SKETCH_SETTINGS = {
    "max_segments": 192,
    "canvas_size": 100.0,
    "part_scale": 20.0,  # jitter 以部件尺度为单位
    "categories": ["box-with-lid", "stick-figure", "flower", "grid"],
    "augment": {
        "removal_prob": 0.05,
        "distort_scale": 0.05
    }
}

# 模型配置
MODEL_CONFIG = {
    "grouper": {
        "enc_hidden": 64,
        "dec_hidden": 128,
        "latent_dim": 32,
        "feat_dim": 128,
        "mixtures": 5,
        "margin": 1.0,
        "lambda_a": 0.6,
        "lambda_g": 1.0,
        "lambda_r": 0.5,
        "lambda_kl": None,  # None 表示与 lambda_r 相同
        "lambda_l2": 0.0,
        "triplets_per_sketch": 0,  # 0 表示 4N
        "exhaustive_triplets": False,
        "z_every_step": True,
        "classifier_hidden": 0,
        "max_segments": 192
    }
}

# 训练配置
TRAIN_CONFIG = {
    "lr0": 0.0003,
    "decay": 0.9999,
    "beta1": 0.5,
    "beta2": 0.9,
    "epsilon": 1e-8,
    "iters": 1500,
    "batch": 8,
    "seed": 0,
    "checkpoint_every": 500,
    "clip_norm": 1.0,
    "weight_decay": 0.0,
    "augment": True,
    "removal_prob": 0.05,
    "distort_scale": 0.05,
    "workers": 1,
    "log_every": 100
}

# 推理设置
INFERENCE_SETTINGS = {
    "merge_threshold": 0.5,
    "proximity_gap": 10.0  # 与草图坐标同单位
}

# 评估设置
EVAL_SETTINGS = {
    "log_base": 2,
    "delimiter": "\t",
    "symmetric_sc": False,
    "weighting": "equal"
}

# 抽象化设置
ABSTRACTION_SETTINGS = {
    "thresholds": [0.05, 0.15, 0.30],
    "relative_thresholds": True,
    "pgm_threshold": 128,
    "dp_tolerance": 1.0,
    "distance_clamp": 1e-6
}

# 渲染设置
RENDER_SETTINGS = {
    "canvas": 256,
    "margin": 16,
    "stroke_width": 2,
    "palette": [
        "#e6194b", "#3cb44b", "#4363d8", "#f58231",
        "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
        "#008080", "#9a6324", "#800000", "#000075"
    ]
}

# 日志配置
LOG_CONFIG = {
    "level": "INFO",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "file": None,
    "max_size": 10 * 1024 * 1024,
    "backup_count": 5
}
