from . import functional, kernels
from .autograd import Parameter, Tensor, no_grad
from .modules import BatchNorm2d, Conv2d, ConvTranspose2d, Module
from .optim import Adam

__all__ = [
    "Adam", "BatchNorm2d", "Conv2d", "ConvTranspose2d", "Module",
    "Parameter", "Tensor", "functional", "kernels", "no_grad",
]
