"""RGBD depth packing, depth alignment metrics, generative metrics, toy
latent diffusion, and software-rendered 360-degree depth panoramas."""

__version__ = "0.1.0"
