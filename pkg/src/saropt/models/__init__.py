from .accounting import LayerInfo, param_totals, receptive_field
from .discriminator import DiscriminatorConfig, PatchDiscriminator, build_discriminator
from .translator import Translator, TranslatorConfig, build_translator

__all__ = [
    "DiscriminatorConfig", "LayerInfo", "PatchDiscriminator", "Translator",
    "TranslatorConfig", "build_discriminator", "build_translator",
    "param_totals", "receptive_field",
]
