"""
URL configuration for the QASL toolkit.

Only the admin is exposed; it is used to browse the run ledger.
"""

from django.contrib import admin
from django.urls import path

urlpatterns = [
    path("admin/", admin.site.urls),
]
