# services/__init__.py
# Tom fil för att göra services till en Python-modul
