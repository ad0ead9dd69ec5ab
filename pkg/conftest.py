"""Configure Django before pytest collects the Imnet test modules."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'App.settings')
django.setup()
