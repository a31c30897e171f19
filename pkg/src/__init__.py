"""
Reduced basis evaluation of fractional norms and fractional operator powers
on Zolotarev spaces.
"""
