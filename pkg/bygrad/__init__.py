"""
Bygrad Package
"""
from .bygrad import Bygrad

__all__ = [
  'Bygrad'
]
