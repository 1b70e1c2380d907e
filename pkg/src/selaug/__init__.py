"""selaug: learning under selective labels with expert-consistency
augmentation and inverse probability weighting.

The package generates selectively labeled synthetic data, estimates the
probability that an expert screens a case in, absorbs confidently
screened-out cases into training with the expert decision as their label,
corrects residual selection bias with inverse probability weights, and
evaluates outcome models on observed, augmented, and fully labeled test
sets.
"""

__version__ = "0.1.0"
