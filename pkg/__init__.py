# Secure Platoon Toolkit
