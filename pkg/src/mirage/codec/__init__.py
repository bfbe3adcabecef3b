"""Keyframe codecs: raw pixel quantization, affine autoencoder, VQ/VQ-VAE."""
from .ae import AeParams, ae_decode, ae_dequantize, ae_encode, ae_quantize, fit_ae
from .kmeans import KMeansResult, kmeans, kmeans_codebook
from .patches import assemble_patches, extract_patches, video_patches
from .pixels import dequantize, pixel_codes, quantize_pixels, unpack_pixels
from .vq import (
    Codebook,
    IndexMap,
    PatchDecoder,
    PatchEncoder,
    index_bits,
    nearest_codeword,
    vq_cost_bits,
    vq_decode,
    vq_encode,
)
from .vqvae import (
    LossTerms,
    TrainResult,
    VqVaeConfig,
    term_gradients,
    train_vqvae,
    training_gradients,
    vqvae_loss,
)

__all__ = [
    "AeParams", "ae_decode", "ae_dequantize", "ae_encode", "ae_quantize", "fit_ae",
    "KMeansResult", "kmeans", "kmeans_codebook",
    "assemble_patches", "extract_patches", "video_patches",
    "dequantize", "pixel_codes", "quantize_pixels", "unpack_pixels",
    "Codebook", "IndexMap", "PatchDecoder", "PatchEncoder", "index_bits",
    "nearest_codeword", "vq_cost_bits", "vq_decode", "vq_encode",
    "LossTerms", "TrainResult", "VqVaeConfig", "term_gradients", "train_vqvae",
    "training_gradients", "vqvae_loss",
]
